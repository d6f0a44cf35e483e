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

#ifndef SKINSIM_PIPELINE_HPP_
#define SKINSIM_PIPELINE_HPP_

#include <iosfwd>
#include <span>
#include <vector>

#include "skinsim/material.hpp"
#include "skinsim/topology.hpp"

namespace skinsim {

// one sampled frame: values for every taxel in canonical order, fractional
// counts so averaged quantities stay exact
using CountFrame = std::vector<double>;

// per-channel start-up averages; indices follow the canonical taxel order
struct Baseline {
  int window_ticks = 0;
  std::vector<double> mean_counts;
};

// throws EmptyStream
Baseline capture_baseline(std::span<const CountFrame> stream, int window_ticks);

struct CalibrationEntry {
  int triangle_id = 0;
  int channel = 0;
  double gain = 0.0;  // K_i
  double residual_rms_counts = 0.0;
};

struct TriangleReference {
  int triangle_id = 0;
  int reference_pad_channel = 6;  // the pad with the lower fit residual
};

struct CalibrationTable {
  std::vector<CalibrationEntry> entries;
  std::vector<TriangleReference> references;

  const CalibrationEntry* find(int triangle_id, int channel) const;
  int reference_pad(int triangle_id) const;

  // zero gains: compensation passes raw values through
  static CalibrationTable zeros(const Patch& patch);

  void save(std::ostream& out) const;
  static CalibrationTable load(std::istream& in);
};

// canonical order helper shared by the pipeline stages (triangles by
// (bus, addr), channels 0..11)
std::vector<TaxelRef> canonical_taxel_order(const Patch& patch);

// K_i = cov(T_i, T_h) / var(T_h), the OLS slope of each pressure taxel
// against the triangle's best thermal pad; throws DegenerateSweep when the
// pad shows no excursion
CalibrationTable calibrate_gains(std::span<const CountFrame> recording,
                                 const Patch& patch);

// T_hat_i(n) = T_i(n) - K_i * (T_h(n) - Tbar_h); thermal pads pass through
// unmodified; throws MissingCalibration
CountFrame compensate(const CountFrame& frame, const Baseline& baseline,
                      const CalibrationTable& table, const Patch& patch);

struct ActivationRegion {
  std::vector<TaxelRef> taxels;
  std::vector<double> responses_counts;  // baseline-subtracted compensated
};

// pressure taxels deviating beyond threshold, grouped by spatial adjacency
std::vector<ActivationRegion> detect_contacts(const CountFrame& compensated,
                                              const Baseline& baseline,
                                              const Patch& patch,
                                              double threshold_counts,
                                              double adjacency_radius_mm);

struct ContactEstimate {
  int patch_id = 0;
  Vec2 centroid_mm;
  double peak_pressure_kpa = 0.0;
  std::vector<TaxelRef> support;
  double total_deltac_ff = 0.0;
};

ContactEstimate localize_contact(const ActivationRegion& region,
                                 const Patch& patch, const MaterialModel& m,
                                 const CdcParams& cdc);

// inverse of the static transduction curve; throws OutOfRange
double estimate_pressure(double deltac_ff, const MaterialModel& m);

struct PressureRange {
  double lo_kpa = 0.0;
  double hi_kpa = 0.0;
};

struct SlopeFit {
  PressureRange range;
  double slope_ff_per_kpa = 0.0;
  int sample_count = 0;
};

struct PressureSample {
  double pressure_kpa = 0.0;
  double deltac_ff = 0.0;
};

// per-range OLS slope; throws InsufficientData below 2 samples in a range
std::vector<SlopeFit> fit_sensitivity(std::span<const PressureSample> samples,
                                      std::span<const PressureRange> ranges);

struct RelaxationFit {
  double sigma0_ff = 0.0;
  double tau_s = 0.0;
};

// log-linear least squares on ln sigma(t) = ln sigma0 - t/tau; throws
// NonPositiveSeries
RelaxationFit fit_relaxation(std::span<const double> time_s,
                             std::span<const double> deltac_ff);

}  // namespace skinsim

#endif  // SKINSIM_PIPELINE_HPP_
