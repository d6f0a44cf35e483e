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

#ifndef SKINSIM_PHYSICS_HPP_
#define SKINSIM_PHYSICS_HPP_

#include <cstdint>
#include <vector>

#include "skinsim/geometry.hpp"
#include "skinsim/material.hpp"
#include "skinsim/topology.hpp"
#include "skinsim/util.hpp"

namespace skinsim {

// ---------------------------------------------------------------------------
// static transduction curve

// piecewise-linear sensitivity with a quadratic blend across gaps between
// segments (slope interpolated linearly, curve stays C1 and monotone);
// throws PressureOutOfRange unless material.clamp_out_of_range
double pressure_to_deltac_static(double pressure_kpa, const MaterialModel& m);

// exact inverse of pressure_to_deltac_static on [0, max_pressure];
// throws OutOfRange outside [0, full_scale_deltac]
double deltac_to_pressure(double deltac_ff, const MaterialModel& m);

// linear elastic indentation: P = modulus * depth / thickness;
// throws DepthExceedsThickness
double depth_to_pressure(double depth_mm, const MaterialModel& m,
                         double dielectric_thickness_mm);

// ---------------------------------------------------------------------------
// spatial spreading

struct ContactStimulus {
  Vec2 center_mm;
  double probe_diameter_mm = 7.0;
  double pressure_kpa = 0.0;
};

struct TaxelPressure {
  TaxelRef ref;
  double pressure_kpa = 0.0;
};

// normalized receptive-field profile at center distance d for a taxel of
// footprint radius r: the Gaussian kernel averaged over the disc footprint,
// scaled so a contact dead-centered on the taxel delivers exactly the
// applied pressure
double spread_shape(double distance_mm, double sigma_mm,
                    double footprint_radius_mm);

// per-taxel pressure map for one contact; covers every taxel of the patch
// in (triangle order, channel) order
std::vector<TaxelPressure> apply_spatial_spread(const ContactStimulus& contact,
                                                const Patch& patch,
                                                const MaterialModel& m);

// ---------------------------------------------------------------------------
// hysteresis

// scalar play state: one per taxel, fed the commanded pressure sample stream
struct HysteresisState {
  double prev_pressure_kpa = 0.0;
  double peak_pressure_kpa = 0.0;
  double loop_scale = 0.0;
  bool unloading = false;
};

// unimodal loading/unloading gap profile in fF; zero at rest and at the top
// of the characterized range, peaking at hysteresis_peak_pressure
double hysteresis_gap_profile(double pressure_kpa, const MaterialModel& m);

// branch correction added to the static curve; zero on first monotone
// loading from rest, up to gap_profile on unloading branches, and back to
// zero when the cycle closes at rest
double apply_hysteresis(HysteresisState& state, double pressure_kpa,
                        const MaterialModel& m);

// ---------------------------------------------------------------------------
// per-taxel dynamic state

struct TaxelState {
  double elastic_ff = 0.0;  // non-relaxing response (relaxation disabled)
  double relax_ff = 0.0;    // relaxing stress component, already decayed
  double temperature_ff = 0.0;
  double pressure_kpa = 0.0;  // incident mechanical pressure
  HysteresisState hysteresis;

  double total_ff() const { return elastic_ff + relax_ff + temperature_ff; }
};

// decays the relaxing component by exp(-dt/tau); composition over
// consecutive steps matches a single step of the summed duration
TaxelState step_relaxation(TaxelState state, double dt_s, double tau_s);

// linear drift shared by every taxel of a group; thermal pads carry no
// pressure response so this is their whole signal
double thermal_response(const TaxelDescriptor& taxel, double temperature_c,
                        const ThermalModel& thermal);

// ---------------------------------------------------------------------------
// digitization

// counts = clamp(round(baseline + deltaC/lsb + noise)), noise std shrunk by
// sqrt(averaging_window)
std::uint16_t sample_taxel(double total_deltac_ff, const CdcParams& cdc,
                           Rng& rng);

}  // namespace skinsim

#endif  // SKINSIM_PHYSICS_HPP_
