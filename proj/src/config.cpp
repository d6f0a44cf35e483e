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

#include "skinsim/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "skinsim/error.hpp"

namespace skinsim {
namespace {

using Json = nlohmann::ordered_json;

Json material_to_json(const MaterialModel& m) {
  Json j;
  j["name"] = m.name;
  Json segs = Json::array();
  for (const SensitivitySegment& s : m.sensitivity_segments) {
    segs.push_back({s.p_lo_kpa, s.p_hi_kpa, s.slope_ff_per_kpa});
  }
  j["sensitivity_segments"] = segs;
  j["hysteresis_gap_fraction"] = m.hysteresis_gap_fraction;
  j["hysteresis_peak_pressure_kpa"] = m.hysteresis_peak_pressure_kpa;
  j["hysteresis_peak_ratio"] = m.hysteresis_peak_ratio;
  j["hysteresis_saturation_kpa"] = m.hysteresis_saturation_kpa;
  j["hysteresis_shape"] = m.hysteresis_shape;
  j["relaxation_tau_s"] = m.relaxation_tau_s;
  j["compressive_modulus_kpa"] = m.compressive_modulus_kpa;
  j["spread_sigma_base_mm"] = m.spread_sigma_base_mm;
  j["spread_sigma_probe_factor"] = m.spread_sigma_probe_factor;
  j["clamp_out_of_range"] = m.clamp_out_of_range;
  Json th;
  th["group_coeff_ff_per_c"] = m.thermal.group_coeff_ff_per_c;
  th["reference_temperature_c"] = m.thermal.reference_temperature_c;
  j["thermal"] = th;
  return j;
}

MaterialModel material_preset(const std::string& name) {
  if (name == "fabric-2013") return MaterialModel::fabric_2013();
  if (name == "foam-2008") return MaterialModel::foam_2008();
  throw Error(ErrorCode::kConfigInvalid, "unknown material preset: " + name);
}

MaterialModel material_from_json(const Json& j) {
  if (j.is_string()) return material_preset(j.get<std::string>());
  MaterialModel m;
  if (j.contains("preset")) m = material_preset(j["preset"]);
  if (j.contains("name")) m.name = j["name"];
  if (j.contains("sensitivity_segments")) {
    m.sensitivity_segments.clear();
    for (const Json& row : j["sensitivity_segments"]) {
      m.sensitivity_segments.push_back(
          {row.at(0).get<double>(), row.at(1).get<double>(),
           row.at(2).get<double>()});
    }
  }
  auto get = [&j](const char* key, double& out) {
    if (j.contains(key)) out = j[key].get<double>();
  };
  get("hysteresis_gap_fraction", m.hysteresis_gap_fraction);
  get("hysteresis_peak_pressure_kpa", m.hysteresis_peak_pressure_kpa);
  get("hysteresis_peak_ratio", m.hysteresis_peak_ratio);
  get("hysteresis_saturation_kpa", m.hysteresis_saturation_kpa);
  get("hysteresis_shape", m.hysteresis_shape);
  get("relaxation_tau_s", m.relaxation_tau_s);
  get("compressive_modulus_kpa", m.compressive_modulus_kpa);
  get("spread_sigma_base_mm", m.spread_sigma_base_mm);
  get("spread_sigma_probe_factor", m.spread_sigma_probe_factor);
  if (j.contains("clamp_out_of_range")) {
    m.clamp_out_of_range = j["clamp_out_of_range"].get<bool>();
  }
  if (j.contains("thermal")) {
    const Json& th = j["thermal"];
    if (th.contains("group_coeff_ff_per_c")) {
      const auto v = th["group_coeff_ff_per_c"].get<std::vector<double>>();
      if (v.size() != 7) {
        throw Error(ErrorCode::kConfigInvalid,
                    "thermal.group_coeff_ff_per_c needs 7 entries");
      }
      std::copy(v.begin(), v.end(), m.thermal.group_coeff_ff_per_c.begin());
    }
    if (th.contains("reference_temperature_c")) {
      m.thermal.reference_temperature_c =
          th["reference_temperature_c"].get<double>();
    }
  }
  return m;
}

Json patch_to_json(const Patch& p) {
  Json j;
  j["id"] = p.id;
  j["dielectric_thickness_mm"] = p.dielectric_thickness_mm;
  Json tris = Json::array();
  for (const TriangleModule& t : p.triangles) {
    Json tj;
    tj["id"] = t.id;
    tj["bus"] = t.i2c_bus;
    tj["addr"] = t.i2c_addr;
    tj["pose"] = {{"x_mm", t.pose.tx},
                  {"y_mm", t.pose.ty},
                  {"theta_rad", t.pose.theta}};
    tris.push_back(tj);
  }
  j["triangles"] = tris;
  return j;
}

Patch patch_from_json(const Json& j, int default_id) {
  if (j.is_string()) {
    return make_preset_patch(j.get<std::string>(), default_id);
  }
  if (j.contains("preset")) {
    return make_preset_patch(j["preset"],
                             j.contains("id") ? j["id"].get<int>()
                                              : default_id);
  }
  std::vector<TriangleLayout> layout;
  for (const Json& tj : j.at("triangles")) {
    TriangleLayout l;
    l.id = tj.at("id").get<int>();
    l.i2c_bus = tj.at("bus").get<int>();
    l.i2c_addr = tj.at("addr").get<int>();
    if (tj.contains("pose")) {
      const Json& pj = tj["pose"];
      l.pose.tx = pj.value("x_mm", 0.0);
      l.pose.ty = pj.value("y_mm", 0.0);
      l.pose.theta = pj.value("theta_rad", 0.0);
    }
    layout.push_back(l);
  }
  const int id = j.contains("id") ? j["id"].get<int>() : default_id;
  const double thickness = j.value("dielectric_thickness_mm", 2.0);
  return build_patch(id, layout, thickness);
}

}  // namespace

SkinConfig default_config(const std::string& patch_preset) {
  SkinConfig c;
  c.material = MaterialModel::fabric_2013();
  c.patches.push_back(make_preset_patch(patch_preset, 0));
  return c;
}

SkinConfig parse_config(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kConfigInvalid,
                std::string("JSON parse failure: ") + e.what());
  }
  SkinConfig c;
  c.sample_rate_hz = j.value("sample_rate_hz", 25.0);
  c.rng_seed = j.value("rng_seed", std::uint64_t{1});
  if (j.contains("material")) c.material = material_from_json(j["material"]);
  if (j.contains("cdc")) {
    const Json& cj = j["cdc"];
    c.cdc.bit_depth = cj.value("bit_depth", 16);
    c.cdc.lsb_ff = cj.value("lsb_ff", c.cdc.lsb_ff);
    c.cdc.averaging_window = cj.value("averaging_window", 1);
    c.cdc.noise_std_counts = cj.value("noise_std_counts", 1.0);
    c.cdc.baseline_counts = cj.value("baseline_counts", 32768.0);
  }
  if (j.contains("patches")) {
    int next_id = 0;
    for (const Json& pj : j["patches"]) {
      c.patches.push_back(patch_from_json(pj, next_id++));
    }
  } else {
    c.patches.push_back(make_preset_patch("flat-prototype", 0));
  }
  return c;
}

std::string config_to_string(const SkinConfig& c) {
  Json j;
  j["sample_rate_hz"] = c.sample_rate_hz;
  j["rng_seed"] = c.rng_seed;
  j["material"] = material_to_json(c.material);
  Json cj;
  cj["bit_depth"] = c.cdc.bit_depth;
  cj["lsb_ff"] = c.cdc.lsb_ff;
  cj["averaging_window"] = c.cdc.averaging_window;
  cj["noise_std_counts"] = c.cdc.noise_std_counts;
  cj["baseline_counts"] = c.cdc.baseline_counts;
  j["cdc"] = cj;
  Json patches = Json::array();
  for (const Patch& p : c.patches) patches.push_back(patch_to_json(p));
  j["patches"] = patches;
  return j.dump(2) + "\n";
}

SkinConfig load_config(const std::string& path_or_preset) {
  if (path_or_preset == "flat-prototype" ||
      path_or_preset == "icub-forearm") {
    return default_config(path_or_preset);
  }
  std::ifstream in(path_or_preset);
  if (!in) {
    throw Error(ErrorCode::kConfigInvalid,
                "config not found: " + path_or_preset);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void save_config(const SkinConfig& config,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  }
  out << config_to_string(config);
}

StimulusTimeline parse_timeline(const std::string& json_text,
                                const SkinConfig& config) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kConfigInvalid,
                std::string("stimulus parse failure: ") + e.what());
  }
  StimulusTimeline timeline;
  for (const Json& ej : j.value("events", Json::array())) {
    TimelineEvent ev;
    ev.t_s = ej.value("t_s", 0.0);
    if (ej.contains("contact")) {
      const Json& cj = ej["contact"];
      ev.kind = TimelineEvent::Kind::kContact;
      ev.contact_id = cj.value("id", 0);
      ev.contact.center_mm = {cj.value("x_mm", 0.0), cj.value("y_mm", 0.0)};
      ev.contact.probe_diameter_mm = cj.value("diameter_mm", 7.0);
      if (cj.contains("pressure_kpa")) {
        ev.contact.pressure_kpa = cj["pressure_kpa"].get<double>();
      } else if (cj.contains("depth_mm")) {
        if (config.patches.empty()) {
          throw Error(ErrorCode::kConfigInvalid,
                      "depth-commanded contact needs a patch");
        }
        ev.contact.pressure_kpa = depth_to_pressure(
            cj["depth_mm"].get<double>(), config.material,
            config.patches.front().dielectric_thickness_mm);
      } else {
        throw Error(ErrorCode::kConfigInvalid,
                    "contact needs pressure_kpa or depth_mm");
      }
    } else if (ej.contains("clear_contact")) {
      ev.kind = TimelineEvent::Kind::kClearContact;
      ev.contact_id = ej["clear_contact"].get<int>();
    } else if (ej.contains("temperature_c")) {
      ev.kind = TimelineEvent::Kind::kTemperature;
      ev.temperature_c = ej["temperature_c"].get<double>();
    } else {
      throw Error(ErrorCode::kConfigInvalid,
                  "event needs contact, clear_contact or temperature_c");
    }
    timeline.events.push_back(ev);
  }
  std::stable_sort(timeline.events.begin(), timeline.events.end(),
                   [](const TimelineEvent& a, const TimelineEvent& b) {
                     return a.t_s < b.t_s;
                   });
  return timeline;
}

StimulusTimeline load_timeline(const std::filesystem::path& path,
                               const SkinConfig& config) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError, "stimulus not found: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_timeline(buf.str(), config);
}

}  // namespace skinsim
