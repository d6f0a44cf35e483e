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

#ifndef SKINSIM_MATERIAL_HPP_
#define SKINSIM_MATERIAL_HPP_

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace skinsim {

// one linear region of the sensitivity curve: slope in fF/kPa over [p_lo, p_hi]
struct SensitivitySegment {
  double p_lo_kpa = 0.0;
  double p_hi_kpa = 0.0;
  double slope_ff_per_kpa = 0.0;
};

// linear drift per group, groups 1..5 are the pressure-taxel families and
// groups 6 and 7 the two embedded reference pads
struct ThermalModel {
  std::array<double, 7> group_coeff_ff_per_c = {6.0, 7.5, 9.0, 10.5, 12.0,
                                                8.0, 8.0};
  double reference_temperature_c = 25.0;

  double coeff(int drift_group) const {
    return group_coeff_ff_per_c[drift_group - 1];
  }
};

// capacitance-to-digital conversion parameters
struct CdcParams {
  int bit_depth = 16;
  // default spans the fabric full-scale deltaC (227.80 fF) over 8 effective
  // bits: 227.80 / 256
  double lsb_ff = 0.88984375;
  int averaging_window = 1;
  double noise_std_counts = 1.0;
  double baseline_counts = 32768.0;

  double max_counts() const { return 65535.0; }
  double effective_noise_std() const;
};

// every transduction parameter of the dielectric/sensor stack
struct MaterialModel {
  std::string name = "fabric-2013";
  std::vector<SensitivitySegment> sensitivity_segments = {
      {0.0, 45.0, 2.50}, {65.0, 160.0, 0.86}};

  double hysteresis_gap_fraction = 0.05;
  double hysteresis_peak_pressure_kpa = 28.6;
  // fraction of the gap bound realized at the profile peak
  double hysteresis_peak_ratio = 0.8;
  // loop amplitude saturates once the cycle peak reaches this pressure
  double hysteresis_saturation_kpa = 100.0;
  double hysteresis_shape = 2.0;

  double relaxation_tau_s = 4680.0;  // 1 h 18 min
  double compressive_modulus_kpa = 320.0;

  double spread_sigma_base_mm = 2.6;
  double spread_sigma_probe_factor = 0.45;

  bool clamp_out_of_range = false;

  ThermalModel thermal;

  // deltaC at the end of the characterized pressure range (integral of the
  // segment table, blends included)
  double full_scale_deltac_ff() const;
  double max_pressure_kpa() const;
  double spread_sigma_mm(double probe_diameter_mm) const {
    return spread_sigma_base_mm + spread_sigma_probe_factor *
                                      probe_diameter_mm * 0.5;
  }

  static MaterialModel fabric_2013();
  static MaterialModel foam_2008();
};

inline double CdcParams::effective_noise_std() const {
  return noise_std_counts /
         std::sqrt(static_cast<double>(averaging_window < 1 ? 1
                                                            : averaging_window));
}

}  // namespace skinsim

#endif  // SKINSIM_MATERIAL_HPP_
