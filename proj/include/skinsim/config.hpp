// Copyright 2026 The skinsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SKINSIM_CONFIG_HPP_
#define SKINSIM_CONFIG_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "skinsim/physics.hpp"
#include "skinsim/topology.hpp"

namespace skinsim {

// config on disk is a JSON tree; presets expand to the full form on load and
// saves always write the full form, so save(load(x)) is byte-stable
SkinConfig default_config(const std::string& patch_preset = "flat-prototype");

SkinConfig parse_config(const std::string& json_text);
std::string config_to_string(const SkinConfig& config);

// path may also name a builtin config preset ("flat-prototype",
// "icub-forearm"); throws ConfigInvalid / IoError
SkinConfig load_config(const std::string& path_or_preset);
void save_config(const SkinConfig& config, const std::filesystem::path& path);

// declarative stimulus script: timestamped contact / temperature commands
struct TimelineEvent {
  enum class Kind { kContact, kClearContact, kTemperature };
  double t_s = 0.0;
  Kind kind = Kind::kContact;
  int contact_id = 0;
  ContactStimulus contact;
  double temperature_c = 0.0;
};

struct StimulusTimeline {
  std::vector<TimelineEvent> events;  // sorted by t_s
};

// depth-commanded contacts are resolved against the config's material and
// first patch thickness
StimulusTimeline parse_timeline(const std::string& json_text,
                                const SkinConfig& config);
StimulusTimeline load_timeline(const std::filesystem::path& path,
                               const SkinConfig& config);

}  // namespace skinsim

#endif  // SKINSIM_CONFIG_HPP_
