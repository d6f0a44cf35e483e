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

#ifndef SKINSIM_SIM_HPP_
#define SKINSIM_SIM_HPP_

#include <cstdint>
#include <map>
#include <vector>

#include "skinsim/material.hpp"
#include "skinsim/physics.hpp"
#include "skinsim/topology.hpp"
#include "skinsim/util.hpp"

namespace skinsim {

// Discrete-time twin of one patch. The consumer drives simulated time; a
// step() is one CDC delivery tick. Contacts and ambient temperature changes
// take effect at the next tick. Long idle waits are advanced analytically
// (the relaxation law is closed form), never by wall clock.
class PatchSimulator {
 public:
  PatchSimulator(const Patch& patch, const MaterialModel& material,
                 const CdcParams& cdc, double sample_rate_hz,
                 std::uint64_t seed);

  void set_contact(int contact_id, const ContactStimulus& stimulus);
  void set_contact_depth(int contact_id, const Vec2& center_mm,
                         double probe_diameter_mm, double depth_mm);
  void clear_contact(int contact_id);
  void set_ambient_c(double temperature_c);
  double ambient_c() const { return ambient_c_; }

  void step();
  void advance_ticks(int n);
  // analytic wait: decays relaxation state and moves the clock without
  // emitting samples
  void advance_time(double seconds);

  std::uint64_t tick() const { return tick_; }
  double time_s() const { return time_s_; }
  double sample_rate_hz() const { return sample_rate_hz_; }

  // transduction-level output in fF (no quantization); with_noise adds the
  // CDC noise scaled to fF
  double deltac_ff(int triangle_id, int channel) const;
  double measure_ff(int triangle_id, int channel, bool with_noise);

  // full digitized frame in canonical (bus, addr, channel) order
  std::vector<std::uint16_t> sample_all();

  // digitizes one triangle's 12 channels; a loop over triangles in canonical
  // order consumes the same noise stream as sample_all
  std::array<std::uint16_t, kChannelsPerTriangle> sample_triangle(
      int triangle_id);

  // relaxing load seen by a probe holding this contact
  double contact_force_n(int contact_id) const;

  const Patch& patch() const { return patch_; }
  const MaterialModel& material() const { return material_; }
  const CdcParams& cdc() const { return cdc_; }
  const std::vector<TaxelRef>& canonical_order() const { return order_; }
  const std::vector<Vec2>& world_positions() const { return world_pos_; }
  int index_of(int triangle_id, int channel) const;
  const TaxelState& state_at(int flat_index) const {
    return states_[flat_index];
  }

 private:
  struct ContactState {
    ContactStimulus stimulus;
    std::vector<double> shape;  // per-taxel receptive-field value
    double hold_s = 0.0;        // time since the command last changed
  };

  void compute_shape(ContactState& c) const;

  Patch patch_;
  MaterialModel material_;
  CdcParams cdc_;
  double sample_rate_hz_;
  Rng rng_;

  std::vector<TaxelRef> order_;
  std::vector<Vec2> world_pos_;
  std::vector<const TaxelDescriptor*> descriptors_;
  std::map<std::pair<int, int>, int> index_;
  std::vector<TaxelState> states_;

  std::map<int, ContactState> contacts_;
  double ambient_c_;
  std::uint64_t tick_ = 0;
  double time_s_ = 0.0;
  double decay_per_tick_;
};

}  // namespace skinsim

#endif  // SKINSIM_SIM_HPP_
