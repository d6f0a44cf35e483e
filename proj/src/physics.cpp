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

#include "skinsim/physics.hpp"

#include <algorithm>
#include <cmath>

#include "skinsim/error.hpp"

namespace skinsim {
namespace {

// cumulative deltaC at the start of segment k (blends included)
double deltac_at_segment_start(const std::vector<SensitivitySegment>& segs,
                               std::size_t k) {
  double c = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    c += segs[i].slope_ff_per_kpa * (segs[i].p_hi_kpa - segs[i].p_lo_kpa);
    if (i + 1 < segs.size()) {
      // quadratic blend over the gap: slope interpolated linearly
      const double w = segs[i + 1].p_lo_kpa - segs[i].p_hi_kpa;
      c += 0.5 * w * (segs[i].slope_ff_per_kpa + segs[i + 1].slope_ff_per_kpa);
    }
  }
  return c;
}

}  // namespace

double MaterialModel::full_scale_deltac_ff() const {
  return deltac_at_segment_start(sensitivity_segments,
                                 sensitivity_segments.size());
}

double MaterialModel::max_pressure_kpa() const {
  return sensitivity_segments.back().p_hi_kpa;
}

MaterialModel MaterialModel::fabric_2013() { return MaterialModel{}; }

MaterialModel MaterialModel::foam_2008() {
  MaterialModel m;
  m.name = "foam-2008";
  m.sensitivity_segments = {{0.0, 160.0, 0.63}};
  m.compressive_modulus_kpa = 150.0;
  return m;
}

double pressure_to_deltac_static(double pressure_kpa, const MaterialModel& m) {
  const auto& segs = m.sensitivity_segments;
  double p = pressure_kpa;
  if (p < 0.0) {
    throw Error(ErrorCode::kPressureOutOfRange, "negative pressure");
  }
  if (p > m.max_pressure_kpa()) {
    if (!m.clamp_out_of_range) {
      throw Error(ErrorCode::kPressureOutOfRange,
                  "pressure " + format_double(p) + " kPa beyond " +
                      format_double(m.max_pressure_kpa()));
    }
    p = m.max_pressure_kpa();
  }

  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (p <= segs[i].p_hi_kpa) {
      const double base = deltac_at_segment_start(segs, i);
      if (p >= segs[i].p_lo_kpa || i == 0) {
        return base + segs[i].slope_ff_per_kpa * (p - segs[i].p_lo_kpa);
      }
      // inside the blend gap before segment i
      const double lo = segs[i - 1].p_hi_kpa;
      const double w = segs[i].p_lo_kpa - lo;
      const double s0 = segs[i - 1].slope_ff_per_kpa;
      const double s1 = segs[i].slope_ff_per_kpa;
      const double x = p - lo;
      const double gap_base = deltac_at_segment_start(segs, i - 1) +
                              s0 * (lo - segs[i - 1].p_lo_kpa);
      return gap_base + s0 * x + 0.5 * (s1 - s0) * x * x / w;
    }
  }
  return m.full_scale_deltac_ff();
}

double deltac_to_pressure(double deltac_ff, const MaterialModel& m) {
  const auto& segs = m.sensitivity_segments;
  const double full = m.full_scale_deltac_ff();
  if (deltac_ff < -1e-12 || deltac_ff > full * (1.0 + 1e-12)) {
    throw Error(ErrorCode::kOutOfRange,
                "deltaC " + format_double(deltac_ff) + " fF outside [0, " +
                    format_double(full) + "]");
  }
  const double c = std::clamp(deltac_ff, 0.0, full);

  for (std::size_t i = 0; i < segs.size(); ++i) {
    const double seg_base = deltac_at_segment_start(segs, i);
    const double seg_end =
        seg_base +
        segs[i].slope_ff_per_kpa * (segs[i].p_hi_kpa - segs[i].p_lo_kpa);
    if (c <= seg_end || i + 1 == segs.size()) {
      if (c >= seg_base) {
        return segs[i].p_lo_kpa + (c - seg_base) / segs[i].slope_ff_per_kpa;
      }
      // inside the blend gap before segment i: invert the quadratic
      // gap_base + s0*x + 0.5*(s1-s0)*x^2/w = c
      const double lo = segs[i - 1].p_hi_kpa;
      const double w = segs[i].p_lo_kpa - lo;
      const double s0 = segs[i - 1].slope_ff_per_kpa;
      const double s1 = segs[i].slope_ff_per_kpa;
      const double gap_base = deltac_at_segment_start(segs, i - 1) +
                              s0 * (lo - segs[i - 1].p_lo_kpa);
      const double a = (s1 - s0) / w;
      const double rhs = c - gap_base;
      // stable root of 0.5*a*x^2 + s0*x - rhs = 0 lying in [0, w]
      const double disc = std::sqrt(s0 * s0 + 2.0 * a * rhs);
      const double x = 2.0 * rhs / (s0 + disc);
      return lo + x;
    }
  }
  return m.max_pressure_kpa();
}

double depth_to_pressure(double depth_mm, const MaterialModel& m,
                         double dielectric_thickness_mm) {
  if (depth_mm < 0.0 || depth_mm >= dielectric_thickness_mm) {
    throw Error(ErrorCode::kDepthExceedsThickness,
                "depth " + format_double(depth_mm) + " mm vs thickness " +
                    format_double(dielectric_thickness_mm));
  }
  return m.compressive_modulus_kpa * depth_mm / dielectric_thickness_mm;
}

namespace {

// 8-point Gauss-Legendre nodes/weights on [-1, 1]
constexpr double kGlNode[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
constexpr double kGlWeight[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};
constexpr int kAngularNodes = 16;

// unnormalized disc average of exp(-|x - c|^2 / (2 sigma^2)) for |c| = d,
// by polar quadrature; the same code path at d = 0 serves as normalizer so
// the ratio is exactly 1 at zero offset
double disc_kernel_sum(double d, double sigma_mm, double radius_mm) {
  const double inv2s2 = 1.0 / (2.0 * sigma_mm * sigma_mm);
  double sum = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double r = radius_mm * 0.5 * (kGlNode[i] + 1.0);
    const double wr = kGlWeight[i] * r;
    for (int j = 0; j < kAngularNodes; ++j) {
      const double th = 2.0 * M_PI * (j + 0.5) / kAngularNodes;
      const double q = d * d + r * r - 2.0 * d * r * std::cos(th);
      sum += wr * std::exp(-q * inv2s2);
    }
  }
  return sum;
}

}  // namespace

double spread_shape(double distance_mm, double sigma_mm,
                    double footprint_radius_mm) {
  // beyond ~6 sigma the footprint average is numerically zero
  if (distance_mm > 6.0 * sigma_mm + footprint_radius_mm) return 0.0;
  const double denom = disc_kernel_sum(0.0, sigma_mm, footprint_radius_mm);
  return disc_kernel_sum(distance_mm, sigma_mm, footprint_radius_mm) / denom;
}

std::vector<TaxelPressure> apply_spatial_spread(const ContactStimulus& contact,
                                                const Patch& patch,
                                                const MaterialModel& m) {
  if (contact.probe_diameter_mm <= 0.0) {
    throw Error(ErrorCode::kMalformedLayout, "probe diameter must be > 0");
  }
  const double sigma = m.spread_sigma_mm(contact.probe_diameter_mm);
  std::vector<TaxelPressure> map;
  map.reserve(patch.taxel_count());
  for (const TriangleModule& tri : patch.triangles) {
    for (const TaxelDescriptor& t : tri.taxels) {
      const double d =
          distance(tri.pose.apply(t.position_mm), contact.center_mm);
      const double rf = std::sqrt(t.area_mm2 / M_PI);
      map.push_back({{tri.id, t.channel},
                     contact.pressure_kpa * spread_shape(d, sigma, rf)});
    }
  }
  return map;
}

double hysteresis_gap_profile(double pressure_kpa, const MaterialModel& m) {
  const double pmax = m.max_pressure_kpa();
  const double u = pressure_kpa / pmax;
  const double us = m.hysteresis_peak_pressure_kpa / pmax;
  if (u <= 0.0 || u >= 1.0 || us <= 0.0 || us >= 1.0) return 0.0;
  const double a = m.hysteresis_shape * us;
  const double b = m.hysteresis_shape * (1.0 - us);
  const double bump =
      std::pow(u / us, a) * std::pow((1.0 - u) / (1.0 - us), b);
  return m.hysteresis_gap_fraction * m.full_scale_deltac_ff() *
         m.hysteresis_peak_ratio * bump;
}

double apply_hysteresis(HysteresisState& state, double pressure_kpa,
                        const MaterialModel& m) {
  constexpr double kEps = 1e-12;
  if (pressure_kpa <= kEps) {
    // cycle closed at rest: memory resets, loop gap vanishes with bump(0)=0
    state = HysteresisState{};
    return 0.0;
  }
  if (pressure_kpa > state.prev_pressure_kpa + kEps) {
    // loading rejoins the virgin branch
    state.unloading = false;
    state.loop_scale = 0.0;
    state.peak_pressure_kpa =
        std::max(state.peak_pressure_kpa, pressure_kpa);
  } else if (pressure_kpa < state.prev_pressure_kpa - kEps) {
    if (!state.unloading) {
      state.unloading = true;
      state.loop_scale = std::clamp(
          state.peak_pressure_kpa / m.hysteresis_saturation_kpa, 0.0, 1.0);
    }
  }
  state.prev_pressure_kpa = pressure_kpa;
  return state.unloading
             ? state.loop_scale * hysteresis_gap_profile(pressure_kpa, m)
             : 0.0;
}

TaxelState step_relaxation(TaxelState state, double dt_s, double tau_s) {
  state.relax_ff *= std::exp(-dt_s / tau_s);
  return state;
}

double thermal_response(const TaxelDescriptor& taxel, double temperature_c,
                        const ThermalModel& thermal) {
  return thermal.coeff(taxel.drift_group) *
         (temperature_c - thermal.reference_temperature_c);
}

std::uint16_t sample_taxel(double total_deltac_ff, const CdcParams& cdc,
                           Rng& rng) {
  const double noise = rng.gauss() * cdc.effective_noise_std();
  const double counts =
      cdc.baseline_counts + total_deltac_ff / cdc.lsb_ff + noise;
  const double clamped = std::clamp(counts, 0.0, cdc.max_counts());
  return static_cast<std::uint16_t>(std::llround(clamped));
}

}  // namespace skinsim
