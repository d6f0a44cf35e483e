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

#include "skinsim/sim.hpp"

#include <algorithm>
#include <cmath>

#include "skinsim/error.hpp"

namespace skinsim {

namespace {
constexpr double kPressureEps = 1e-12;
}

PatchSimulator::PatchSimulator(const Patch& patch,
                               const MaterialModel& material,
                               const CdcParams& cdc, double sample_rate_hz,
                               std::uint64_t seed)
    : patch_(patch),
      material_(material),
      cdc_(cdc),
      sample_rate_hz_(sample_rate_hz),
      rng_(seed),
      ambient_c_(material.thermal.reference_temperature_c) {
  // canonical order: triangles by (bus, addr), channels 0..11
  std::vector<const TriangleModule*> tris;
  for (const TriangleModule& t : patch_.triangles) tris.push_back(&t);
  std::sort(tris.begin(), tris.end(),
            [](const TriangleModule* a, const TriangleModule* b) {
              if (a->i2c_bus != b->i2c_bus) return a->i2c_bus < b->i2c_bus;
              return a->i2c_addr < b->i2c_addr;
            });
  for (const TriangleModule* t : tris) {
    for (int ch = 0; ch < kChannelsPerTriangle; ++ch) {
      const int idx = static_cast<int>(order_.size());
      order_.push_back({t->id, ch});
      world_pos_.push_back(t->pose.apply(t->taxels[ch].position_mm));
      descriptors_.push_back(&t->taxels[ch]);
      index_[{t->id, ch}] = idx;
    }
  }
  states_.resize(order_.size());
  decay_per_tick_ =
      std::exp(-1.0 / (sample_rate_hz_ * material_.relaxation_tau_s));
}

int PatchSimulator::index_of(int triangle_id, int channel) const {
  const auto it = index_.find({triangle_id, channel});
  if (it == index_.end()) {
    throw Error(ErrorCode::kUnknownTaxel,
                "triangle " + std::to_string(triangle_id) + " channel " +
                    std::to_string(channel));
  }
  return it->second;
}

void PatchSimulator::compute_shape(ContactState& c) const {
  const double sigma = material_.spread_sigma_mm(c.stimulus.probe_diameter_mm);
  c.shape.resize(order_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) {
    const double d = distance(world_pos_[i], c.stimulus.center_mm);
    const double rf = std::sqrt(descriptors_[i]->area_mm2 / M_PI);
    c.shape[i] = spread_shape(d, sigma, rf);
  }
}

void PatchSimulator::set_contact(int contact_id,
                                 const ContactStimulus& stimulus) {
  auto [it, inserted] = contacts_.try_emplace(contact_id);
  ContactState& c = it->second;
  const bool geometry_changed =
      inserted ||
      c.stimulus.center_mm.x != stimulus.center_mm.x ||
      c.stimulus.center_mm.y != stimulus.center_mm.y ||
      c.stimulus.probe_diameter_mm != stimulus.probe_diameter_mm;
  const bool changed =
      geometry_changed || c.stimulus.pressure_kpa != stimulus.pressure_kpa;
  c.stimulus = stimulus;
  if (geometry_changed) compute_shape(c);
  if (changed) c.hold_s = 0.0;
}

void PatchSimulator::set_contact_depth(int contact_id, const Vec2& center_mm,
                                       double probe_diameter_mm,
                                       double depth_mm) {
  ContactStimulus s;
  s.center_mm = center_mm;
  s.probe_diameter_mm = probe_diameter_mm;
  s.pressure_kpa =
      depth_to_pressure(depth_mm, material_, patch_.dielectric_thickness_mm);
  set_contact(contact_id, s);
}

void PatchSimulator::clear_contact(int contact_id) {
  contacts_.erase(contact_id);
}

void PatchSimulator::set_ambient_c(double temperature_c) {
  ambient_c_ = temperature_c;
}

void PatchSimulator::step() {
  const double dt = 1.0 / sample_rate_hz_;
  for (std::size_t i = 0; i < order_.size(); ++i) {
    const TaxelDescriptor& desc = *descriptors_[i];
    TaxelState& st = states_[i];

    if (desc.kind == TaxelKind::kPressure) {
      double p = 0.0;
      for (const auto& [id, c] : contacts_) {
        p += c.stimulus.pressure_kpa * c.shape[i];
      }
      if (std::abs(p - st.pressure_kpa) > kPressureEps) {
        // fresh stimulus: response resets to the static curve plus the
        // hysteresis branch correction, then relaxes while held
        st.pressure_kpa = p;
        const double corr = apply_hysteresis(st.hysteresis, p, material_);
        st.relax_ff = pressure_to_deltac_static(p, material_) + corr;
        st.elastic_ff = 0.0;
      } else {
        st.relax_ff *= decay_per_tick_;
      }
    }
    st.temperature_ff = thermal_response(desc, ambient_c_, material_.thermal);
  }
  for (auto& [id, c] : contacts_) c.hold_s += dt;
  ++tick_;
  time_s_ += dt;
}

void PatchSimulator::advance_ticks(int n) {
  for (int i = 0; i < n; ++i) step();
}

void PatchSimulator::advance_time(double seconds) {
  if (seconds <= 0.0) return;
  const double decay = std::exp(-seconds / material_.relaxation_tau_s);
  for (TaxelState& st : states_) st.relax_ff *= decay;
  for (auto& [id, c] : contacts_) c.hold_s += seconds;
  tick_ += static_cast<std::uint64_t>(std::llround(seconds * sample_rate_hz_));
  time_s_ += seconds;
}

double PatchSimulator::deltac_ff(int triangle_id, int channel) const {
  return states_[index_.at({triangle_id, channel})].total_ff();
}

double PatchSimulator::measure_ff(int triangle_id, int channel,
                                  bool with_noise) {
  double v = deltac_ff(triangle_id, channel);
  if (with_noise) {
    v += rng_.gauss() * cdc_.effective_noise_std() * cdc_.lsb_ff;
  }
  return v;
}

std::vector<std::uint16_t> PatchSimulator::sample_all() {
  std::vector<std::uint16_t> counts;
  counts.reserve(states_.size());
  for (const TaxelState& st : states_) {
    counts.push_back(sample_taxel(st.total_ff(), cdc_, rng_));
  }
  return counts;
}

std::array<std::uint16_t, kChannelsPerTriangle>
PatchSimulator::sample_triangle(int triangle_id) {
  const int base = index_of(triangle_id, 0);
  std::array<std::uint16_t, kChannelsPerTriangle> counts;
  for (int ch = 0; ch < kChannelsPerTriangle; ++ch) {
    counts[ch] = sample_taxel(states_[base + ch].total_ff(), cdc_, rng_);
  }
  return counts;
}

double PatchSimulator::contact_force_n(int contact_id) const {
  const auto it = contacts_.find(contact_id);
  if (it == contacts_.end()) return 0.0;
  const ContactState& c = it->second;
  const double r = c.stimulus.probe_diameter_mm * 0.5;
  const double area_mm2 = M_PI * r * r;
  const double relaxed = c.stimulus.pressure_kpa *
                         std::exp(-c.hold_s / material_.relaxation_tau_s);
  // kPa * mm^2 = mN
  return relaxed * area_mm2 * 1e-3;
}

}  // namespace skinsim
