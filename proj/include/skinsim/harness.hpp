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

#ifndef SKINSIM_HARNESS_HPP_
#define SKINSIM_HARNESS_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "skinsim/pipeline.hpp"
#include "skinsim/sim.hpp"
#include "skinsim/topology.hpp"

namespace skinsim {

// virtual Cartesian probe path: waypoints are commanded instantaneously in
// simulated time ("as fast as possible"), dwells advance the clock
struct ProbeTrajectory {
  struct Waypoint {
    Vec2 position_mm;
    double depth_mm = 0.0;
    double dwell_s = 0.0;
  };
  std::vector<Waypoint> waypoints;
  double probe_diameter_mm = 7.0;
  double inter_cycle_wait_s = 0.0;
};

// reads applied pressure times the probe disc area, relaxing with the
// dielectric stress
struct VirtualLoadCell {
  double noise_std_n = 0.0;
  double force_limit_n = 4.9;  // 0.5 kg cell
};

struct ExperimentReport {
  std::string kind;
  std::filesystem::path csv_path;
  nlohmann::ordered_json summary;
  bool passed = false;
  bool audit_passed = false;
};

// the taxel whose world position is nearest the pressure-taxel centroid;
// experiments default to probing it
TaxelRef default_target(const Patch& patch);

struct IndentationParams {
  double probe_diameter_mm = 7.0;
  VirtualLoadCell load_cell;
  int cycles = 15;
  double dwell_s = 2.0;
  double inter_cycle_wait_s = 900.0;  // 15 minutes
  double depth_step_mm = 0.2;
  double start_pressure_kpa = 2.0;  // lower edge of the first fit range
  std::vector<PressureRange> fit_ranges = {{2.0, 45.0}, {65.0, 160.0}};
  // pass tolerances on recovered slopes, relative
  double slope_tol_noisy = 0.03;
  double slope_tol_noise_free = 1e-6;
};

struct HysteresisParams {
  double probe_diameter_mm = 7.0;
  VirtualLoadCell load_cell;
  int cycles = 15;
  double dwell_s = 2.0;
  double inter_cycle_wait_s = 60.0;
  double depth_step_mm = 0.2;
  double gap_tol_ff = 0.5;
  double location_tol_kpa = 5.0;
  double bound_fraction = 0.05;  // of full scale, at every step
};

struct RelaxationParams {
  double probe_diameter_mm = 7.0;
  double hold_s = 600.0;
  double hold_pressure_kpa = 30.0;  // inside the first linear region
  double tau_tol_noisy = 0.10;
  double tau_tol_noise_free = 0.02;
};

struct SpatialScanParams {
  std::vector<double> probe_diameters_mm = {2.0, 7.0};
  double step_mm = 0.4;
  double return_offset_mm = 0.2;
  int repetitions = 3;
  double scan_pressure_kpa = 40.0;
  double centroid_tol_mm = 0.2;
  // start/end of the scan line; defaults target the flat prototype's
  // filled taxel row through the patch interior
  Vec2 segment_start_mm = {40.0, 31.176914536239792};
  Vec2 segment_end_mm = {70.0, 31.176914536239792};
};

struct ThermalSweepParams {
  double t_start_c = 15.0;
  double t_end_c = 40.0;
  double duration_s = 600.0;
  int baseline_window_ticks = 50;
  int record_every_ticks = 50;
  double residual_fraction = 0.10;  // of uncompensated max drift
};

ExperimentReport run_indentation_sweep(const SkinConfig& config,
                                       const TaxelRef& target,
                                       const IndentationParams& params,
                                       const std::filesystem::path& out_dir);

ExperimentReport run_hysteresis_cycles(const SkinConfig& config,
                                       const TaxelRef& target,
                                       const HysteresisParams& params,
                                       const std::filesystem::path& out_dir);

ExperimentReport run_relaxation_test(const SkinConfig& config,
                                     const TaxelRef& target,
                                     const RelaxationParams& params,
                                     const std::filesystem::path& out_dir);

ExperimentReport run_spatial_scan(const SkinConfig& config,
                                  const SpatialScanParams& params,
                                  const std::filesystem::path& out_dir);

ExperimentReport run_thermal_sweep(const SkinConfig& config,
                                   const ThermalSweepParams& params,
                                   const std::filesystem::path& out_dir);

inline const std::vector<std::string>& all_experiments() {
  static const std::vector<std::string> names = {
      "indentation", "hysteresis", "relaxation", "spatial", "thermal"};
  return names;
}

// runs the named experiments with default parameters, writes one directory
// per experiment plus battery_summary.json
std::vector<ExperimentReport> run_battery(
    const SkinConfig& config, const std::vector<std::string>& experiments,
    const std::filesystem::path& out_dir);

}  // namespace skinsim

#endif  // SKINSIM_HARNESS_HPP_
