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

// End-to-end acceptance battery. Each criterion prints one pass/fail line;
// tolerances are pinned here, not configurable.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "skinsim/bus.hpp"
#include "skinsim/config.hpp"
#include "skinsim/harness.hpp"
#include "skinsim/physics.hpp"
#include "skinsim/pipeline.hpp"
#include "skinsim/sim.hpp"
#include "skinsim/util.hpp"

using namespace skinsim;

namespace {

class CriterionTimer {
 public:
  CriterionTimer(int id, std::string name, double limit_s)
      : id_(id), name_(std::move(name)), limit_s_(limit_s),
        start_(std::chrono::steady_clock::now()) {}

  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

  bool within_limit() const {
    return limit_s_ <= 0.0 || seconds() < limit_s_;
  }

  void report(bool pass) const {
    std::printf("[%s] criterion %d: %s (%.2f s)\n", pass ? "PASS" : "FAIL",
                id_, name_.c_str(), seconds());
    std::fflush(stdout);
  }

 private:
  int id_;
  std::string name_;
  double limit_s_;
  std::chrono::steady_clock::time_point start_;
};

std::filesystem::path accept_dir(const std::string& tag) {
  const auto dir =
      std::filesystem::temp_directory_path() / ("skinsim-accept-" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("criterion 1: sensitivity recovery") {
  CriterionTimer timer(1, "sensitivity recovery 2.50 / 0.86 fF/kPa", 5.0);
  bool pass = true;

  // noise-free: exact to 1e-6
  {
    SkinConfig config = default_config();
    config.cdc.noise_std_counts = 0.0;
    const auto r = run_indentation_sweep(config,
                                         default_target(config.patches[0]),
                                         {}, accept_dir("c1-exact"));
    const auto& slopes = r.summary["slopes"];
    const double s1 = slopes[0]["slope_ff_per_kpa"].get<double>();
    const double s2 = slopes[1]["slope_ff_per_kpa"].get<double>();
    pass = pass && std::abs(s1 / 2.50 - 1.0) <= 1e-6;
    pass = pass && std::abs(s2 / 0.86 - 1.0) <= 1e-6;
    pass = pass && r.passed && r.audit_passed;
  }
  // default noise: within 3%
  {
    const SkinConfig config = default_config();
    const auto r = run_indentation_sweep(config,
                                         default_target(config.patches[0]),
                                         {}, accept_dir("c1-noisy"));
    const auto& slopes = r.summary["slopes"];
    const double s1 = slopes[0]["slope_ff_per_kpa"].get<double>();
    const double s2 = slopes[1]["slope_ff_per_kpa"].get<double>();
    pass = pass && std::abs(s1 / 2.50 - 1.0) <= 0.03;
    pass = pass && std::abs(s2 / 0.86 - 1.0) <= 0.03;
    pass = pass && r.passed && r.audit_passed;
  }

  pass = pass && timer.within_limit();
  timer.report(pass);
  CHECK(pass);
}

TEST_CASE("criterion 2: hysteresis loop gap") {
  CriterionTimer timer(2, "hysteresis max gap 9.1 fF near 28.6 kPa", 5.0);
  bool pass = true;

  const SkinConfig config = default_config();
  const auto r = run_hysteresis_cycles(config,
                                       default_target(config.patches[0]), {},
                                       accept_dir("c2"));
  const double max_gap = r.summary["max_gap_ff"].get<double>();
  const double at_kpa = r.summary["max_gap_pressure_kpa"].get<double>();
  pass = pass && std::abs(max_gap - 9.1) <= 0.5;
  pass = pass && std::abs(at_kpa - 28.6) <= 5.0;
  const double full_scale = config.material.full_scale_deltac_ff();
  for (const auto& step : r.summary["steps"]) {
    pass = pass && step["gap_ff"].get<double>() <= 0.05 * full_scale;
  }
  pass = pass && r.passed && r.audit_passed;

  pass = pass && timer.within_limit();
  timer.report(pass);
  CHECK(pass);
}

TEST_CASE("criterion 3: relaxation constant recovery") {
  CriterionTimer timer(3, "tau = 4680 s from a 600 s hold", 2.0);
  bool pass = true;

  {
    SkinConfig config = default_config();
    config.cdc.noise_std_counts = 0.0;
    const auto r = run_relaxation_test(config,
                                       default_target(config.patches[0]), {},
                                       accept_dir("c3-exact"));
    const double tau = r.summary["fitted_tau_s"].get<double>();
    pass = pass && std::abs(tau / 4680.0 - 1.0) <= 0.02;
    pass = pass && r.passed && r.audit_passed;
  }
  {
    const SkinConfig config = default_config();
    const auto r = run_relaxation_test(config,
                                       default_target(config.patches[0]), {},
                                       accept_dir("c3-noisy"));
    const double tau = r.summary["fitted_tau_s"].get<double>();
    pass = pass && std::abs(tau / 4680.0 - 1.0) <= 0.10;
    pass = pass && r.passed && r.audit_passed;
  }

  pass = pass && timer.within_limit();
  timer.report(pass);
  CHECK(pass);
}

TEST_CASE("criterion 4: thermal compensation") {
  CriterionTimer timer(4, "15-40 C sweeps, residual <= 10%, pads inert", 5.0);
  bool pass = true;

  const SkinConfig config = default_config();
  const auto r = run_thermal_sweep(config, {}, accept_dir("c4"));
  pass = pass &&
         r.summary["residuals"]["up"]["worst_ratio"].get<double>() <= 0.10;
  pass = pass &&
         r.summary["residuals"]["down"]["worst_ratio"].get<double>() <= 0.10;
  bool pads_inert = false;
  for (const auto& c : r.summary["checks"]) {
    if (c["name"] == "pads_pressure_invariant") {
      pads_inert = c["pass"].get<bool>();
    }
  }
  pass = pass && pads_inert && r.passed && r.audit_passed;

  pass = pass && timer.within_limit();
  timer.report(pass);
  CHECK(pass);
}

TEST_CASE("criterion 5: spatial hyperacuity") {
  CriterionTimer timer(5, "interleaved scan: unimodal bells, FWHM order, "
                          "centroid <= 0.2 mm", 10.0);
  bool pass = true;

  const SkinConfig config = default_config();
  const auto r = run_spatial_scan(config, {}, accept_dir("c5"));
  for (const auto& d : r.summary["per_diameter"]) {
    pass = pass && d["unimodal_violations"].get<int>() == 0;
    pass = pass && d["mean_centroid_err_x_mm"].get<double>() <= 0.2;
  }
  const double fwhm2 =
      r.summary["per_diameter"][0]["mean_fwhm_mm"].get<double>();
  const double fwhm7 =
      r.summary["per_diameter"][1]["mean_fwhm_mm"].get<double>();
  pass = pass && fwhm7 > fwhm2;
  pass = pass && r.passed && r.audit_passed;

  pass = pass && timer.within_limit();
  timer.report(pass);
  CHECK(pass);
}

TEST_CASE("criterion 6: bus codec property suite") {
  CriterionTimer timer(6, "codec identity over 1e6 vectors, 64 frames/tick, "
                          "log round trip", 30.0);
  bool pass = true;

  // 1e6 random sample vectors and addresses, bit-exact round trip
  {
    Rng rng(20260809);
    long failures = 0;
    for (long i = 0; i < 1000000; ++i) {
      std::array<std::uint16_t, 12> samples;
      for (auto& v : samples) {
        v = static_cast<std::uint16_t>(rng.next_u64() & 0xffff);
      }
      const TriangleAddress addr{static_cast<int>(rng.next_u64() % 16),
                                 static_cast<int>(rng.next_u64() % 16)};
      const std::uint64_t tick = rng.next_u64();
      const DecodedTriangle d =
          decode_frames(encode_frames(samples, addr, tick));
      if (d.samples != samples || d.address.board_id != addr.board_id ||
          d.address.triangle_index != addr.triangle_index ||
          d.tick_mod64 != tick % 64) {
        ++failures;
      }
    }
    pass = pass && failures == 0;
  }

  // 16-triangle patch at 25 Hz: exactly 64 frames per tick
  {
    const SkinConfig config = default_config();
    PatchSimulator sim(config.patches[0], config.material, config.cdc, 25.0,
                       config.rng_seed);
    MtbPoller poller(sim, 0);
    std::vector<LogRecord> records;
    for (int t = 0; t < 25; ++t) {
      const FrameSet set = poller.next();
      pass = pass && set.frames.size() == 64;
      for (const CanFrame& f : set.frames) {
        records.push_back({set.tick * 40000000ull, f});
      }
    }
    // binary-log round trip, byte identical
    std::ostringstream a;
    write_log(a, records);
    std::istringstream in(a.str());
    const auto back = read_log(in);
    std::ostringstream b;
    write_log(b, back);
    pass = pass && a.str() == b.str() && back.size() == records.size();
  }

  pass = pass && timer.within_limit();
  timer.report(pass);
  CHECK(pass);
}

TEST_CASE("criterion 7: battery determinism") {
  CriterionTimer timer(7, "identical config+seed gives byte-identical "
                          "outputs", 0.0);
  bool pass = true;

  const SkinConfig config = default_config();
  const auto dir_a = accept_dir("c7-a");
  const auto dir_b = accept_dir("c7-b");
  run_battery(config, all_experiments(), dir_a);
  run_battery(config, all_experiments(), dir_b);

  std::map<std::string, std::filesystem::path> files_a, files_b;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir_a)) {
    if (e.is_regular_file()) {
      files_a[std::filesystem::relative(e.path(), dir_a).string()] = e.path();
    }
  }
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir_b)) {
    if (e.is_regular_file()) {
      files_b[std::filesystem::relative(e.path(), dir_b).string()] = e.path();
    }
  }
  pass = pass && !files_a.empty() && files_a.size() == files_b.size();
  for (const auto& [rel, path_a] : files_a) {
    const auto it = files_b.find(rel);
    if (it == files_b.end() || slurp(path_a) != slurp(it->second)) {
      pass = false;
    }
  }

  timer.report(pass);
  CHECK(pass);
}

TEST_CASE("criterion 8: equation unit suite") {
  CriterionTimer timer(8, "compensation identities, relaxation semigroup, "
                          "pressure inverse", 0.0);
  bool pass = true;

  // compensation pass-throughs: zero gain, and pad at its baseline
  {
    const Patch patch = build_patch(0, flat_prototype_layout());
    const auto order = canonical_taxel_order(patch);
    Baseline base;
    base.window_ticks = 1;
    base.mean_counts.assign(order.size(), 32768.0);
    Rng rng(8);
    CountFrame frame(order.size());
    for (double& v : frame) v = 32768.0 + rng.gauss() * 200.0;

    CalibrationTable zeros = CalibrationTable::zeros(patch);
    const CountFrame with_zero = compensate(frame, base, zeros, patch);
    for (std::size_t i = 0; i < frame.size(); ++i) {
      pass = pass && with_zero[i] == frame[i];
    }

    CalibrationTable gains = CalibrationTable::zeros(patch);
    for (CalibrationEntry& e : gains.entries) e.gain = 1.37;
    CountFrame pads_at_base = frame;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (order[i].channel == kThermalChannelA ||
          order[i].channel == kThermalChannelB) {
        pads_at_base[i] = base.mean_counts[i];
      }
    }
    const CountFrame comp = compensate(pads_at_base, base, gains, patch);
    for (std::size_t i = 0; i < order.size(); ++i) {
      pass = pass && comp[i] == pads_at_base[i];
    }
  }

  // relaxation semigroup to 1e-12 relative
  {
    Rng rng(88);
    for (int i = 0; i < 1000; ++i) {
      const double tau = 100.0 + rng.uniform01() * 10000.0;
      TaxelState s;
      s.relax_ff = 1.0 + rng.uniform01() * 300.0;
      const double dt1 = rng.uniform01() * 5000.0 + 1e-6;
      const double dt2 = rng.uniform01() * 5000.0 + 1e-6;
      TaxelState split = step_relaxation(s, dt1, tau);
      split = step_relaxation(split, dt2, tau);
      const TaxelState joint = step_relaxation(s, dt1 + dt2, tau);
      if (std::abs(split.relax_ff - joint.relax_ff) >
          1e-12 * std::abs(joint.relax_ff)) {
        pass = false;
      }
    }
  }

  // pressure <-> deltaC inverse identity to 1e-9 kPa on [0, 160]
  {
    const MaterialModel m = MaterialModel::fabric_2013();
    Rng rng(888);
    for (double p = 0.0; p <= 160.0; p += 0.005) {
      if (std::abs(deltac_to_pressure(pressure_to_deltac_static(p, m), m) -
                   p) > 1e-9) {
        pass = false;
      }
    }
    for (int i = 0; i < 100000; ++i) {
      const double p = rng.uniform01() * 160.0;
      if (std::abs(deltac_to_pressure(pressure_to_deltac_static(p, m), m) -
                   p) > 1e-9) {
        pass = false;
      }
    }
  }

  timer.report(pass);
  CHECK(pass);
}
