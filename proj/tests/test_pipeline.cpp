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

#include <cmath>
#include <sstream>

#include <doctest.h>

#include "skinsim/config.hpp"
#include "skinsim/error.hpp"
#include "skinsim/pipeline.hpp"
#include "skinsim/physics.hpp"
#include "skinsim/util.hpp"

using namespace skinsim;

namespace {

Patch two_triangle_patch() {
  TriangleLayout a, b;
  a.id = 0;
  a.i2c_bus = 0;
  a.i2c_addr = 0;
  b.id = 1;
  b.pose = {40.0, 0.0, 0.0};
  b.i2c_bus = 0;
  b.i2c_addr = 1;
  return build_patch(0, {a, b});
}

// synthetic drift recording generated straight from the thermal model
std::vector<CountFrame> synthetic_sweep(const Patch& patch,
                                        const ThermalModel& th,
                                        const CdcParams& cdc, int n_frames,
                                        double t_lo, double t_hi,
                                        double noise_std, Rng* rng) {
  const auto order = canonical_taxel_order(patch);
  std::vector<CountFrame> frames;
  for (int n = 0; n < n_frames; ++n) {
    const double t = t_lo + (t_hi - t_lo) * n / std::max(1, n_frames - 1);
    CountFrame f(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      const TriangleModule* tri = patch.find_triangle(order[i].triangle_id);
      const TaxelDescriptor& d = tri->taxels[order[i].channel];
      f[i] = cdc.baseline_counts +
             thermal_response(d, t, th) / cdc.lsb_ff +
             (rng != nullptr ? rng->gauss() * noise_std : 0.0);
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace

TEST_CASE("capture_baseline averages per channel") {
  const std::vector<CountFrame> constant(10, CountFrame{5.0, 7.0});
  const Baseline b = capture_baseline(constant, 10);
  CHECK(b.mean_counts[0] == 5.0);
  CHECK(b.mean_counts[1] == 7.0);

  // window 1 picks the first frame
  const std::vector<CountFrame> two = {{1.0}, {9.0}};
  CHECK(capture_baseline(two, 1).mean_counts[0] == 1.0);

  // alternating v-1, v+1 over an even window averages to v
  std::vector<CountFrame> alt;
  for (int i = 0; i < 8; ++i) {
    alt.push_back({100.0 + ((i % 2 == 0) ? -1.0 : 1.0)});
  }
  CHECK(capture_baseline(alt, 8).mean_counts[0] == 100.0);

  CHECK_THROWS_AS(capture_baseline({}, 5), Error);
}

TEST_CASE("compensate implements the gain-times-pad-excursion correction") {
  const Patch patch = two_triangle_patch();
  const auto order = canonical_taxel_order(patch);
  Baseline base;
  base.window_ticks = 1;
  base.mean_counts.assign(order.size(), 1000.0);

  CalibrationTable table = CalibrationTable::zeros(patch);

  CountFrame frame(order.size(), 1000.0);
  const std::size_t pad6 = 6;   // triangle 0 channel 6 in canonical order
  const std::size_t tax0 = 0;   // triangle 0 channel 0
  frame[pad6] = 1100.0;
  frame[tax0] = 1000.0;

  // K = 0 passes raw through
  CHECK(compensate(frame, base, table, patch)[tax0] == 1000.0);

  // pad at baseline leaves everything untouched regardless of gain
  for (CalibrationEntry& e : table.entries) e.gain = 0.5;
  CountFrame at_base = frame;
  at_base[pad6] = 1000.0;
  CHECK(compensate(at_base, base, table, patch)[tax0] == 1000.0);

  // hand evaluation: 1000 - 0.5 * (1100 - 1000) = 950
  CHECK(compensate(frame, base, table, patch)[tax0] == 950.0);

  // thermal pads pass through unmodified
  CHECK(compensate(frame, base, table, patch)[pad6] == 1100.0);

  // a missing entry is an error
  CalibrationTable partial = table;
  partial.entries.erase(partial.entries.begin());
  CHECK_THROWS_AS(compensate(frame, base, partial, patch), Error);
}

TEST_CASE("calibrate_gains recovers an exact proportional drift") {
  const Patch patch = two_triangle_patch();
  const auto order = canonical_taxel_order(patch);

  // taxel drift = 0.8 * pad drift, exactly
  std::vector<CountFrame> rec;
  for (int n = 0; n < 50; ++n) {
    CountFrame f(order.size(), 1000.0);
    const double excursion = 3.0 * n;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const TriangleModule* tri = patch.find_triangle(order[i].triangle_id);
      const TaxelDescriptor& d = tri->taxels[order[i].channel];
      f[i] += (d.kind == TaxelKind::kThermal) ? excursion : 0.8 * excursion;
    }
    rec.push_back(std::move(f));
  }
  const CalibrationTable table = calibrate_gains(rec, patch);
  CHECK(table.entries.size() == 20);  // 10 pressure taxels per triangle
  for (const CalibrationEntry& e : table.entries) {
    CHECK(e.gain == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(e.residual_rms_counts == doctest::Approx(0.0).epsilon(1e-9));
  }
  // equal pads tie-break to channel 6
  CHECK(table.reference_pad(0) == 6);

  // constant-temperature recording is degenerate
  const std::vector<CountFrame> flat(20, CountFrame(order.size(), 1000.0));
  try {
    calibrate_gains(flat, patch);
    FAIL("expected DegenerateSweep");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateSweep);
  }
}

TEST_CASE("zero-noise linear drift compensates to 1e-9 counts") {
  const Patch patch = two_triangle_patch();
  const ThermalModel th;
  const CdcParams cdc;
  const auto frames = synthetic_sweep(patch, th, cdc, 100, 15.0, 40.0, 0.0,
                                      nullptr);
  const Baseline base = capture_baseline(frames, 1);
  const CalibrationTable table = calibrate_gains(frames, patch);
  for (const CountFrame& f : frames) {
    const CountFrame comp = compensate(f, base, table, patch);
    const auto order = canonical_taxel_order(patch);
    for (std::size_t i = 0; i < order.size(); ++i) {
      const TriangleModule* tri = patch.find_triangle(order[i].triangle_id);
      if (tri->taxels[order[i].channel].kind != TaxelKind::kPressure) continue;
      CHECK(std::abs(comp[i] - base.mean_counts[i]) < 1e-9);
    }
  }
}

TEST_CASE("gains transfer between triangles with matching drift groups") {
  const Patch patch = two_triangle_patch();
  const ThermalModel th;
  const CdcParams cdc;
  Rng rng(11);
  const auto frames =
      synthetic_sweep(patch, th, cdc, 400, 15.0, 40.0, 1.0, &rng);
  const Baseline base = capture_baseline(frames, 10);
  CalibrationTable table = calibrate_gains(frames, patch);

  // overwrite triangle 1's gains with triangle 0's (same drift groups)
  for (CalibrationEntry& e : table.entries) {
    if (e.triangle_id == 1) {
      e.gain = table.find(0, e.channel)->gain;
    }
  }
  const auto order = canonical_taxel_order(patch);
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i].triangle_id != 1) continue;
    const TriangleModule* tri = patch.find_triangle(1);
    if (tri->taxels[order[i].channel].kind != TaxelKind::kPressure) continue;
    double uncomp = 0.0, resid = 0.0;
    for (const CountFrame& f : frames) {
      const CountFrame comp = compensate(f, base, table, patch);
      uncomp = std::max(uncomp, std::abs(f[i] - base.mean_counts[i]));
      resid = std::max(resid, std::abs(comp[i] - base.mean_counts[i]));
    }
    worst_ratio = std::max(worst_ratio, resid / uncomp);
  }
  CHECK(worst_ratio <= 0.15);
}

TEST_CASE("detect_contacts groups activations by adjacency") {
  const Patch patch = two_triangle_patch();
  const auto order = canonical_taxel_order(patch);
  Baseline base;
  base.window_ticks = 1;
  base.mean_counts.assign(order.size(), 0.0);

  SUBCASE("idle frame yields nothing") {
    const CountFrame idle(order.size(), 0.0);
    CHECK(detect_contacts(idle, base, patch, 3.0, 9.0).empty());
  }

  SUBCASE("single strong taxel is one single-taxel region") {
    CountFrame f(order.size(), 0.0);
    f[0] = 50.0;
    const auto regions = detect_contacts(f, base, patch, 3.0, 9.0);
    REQUIRE(regions.size() == 1);
    CHECK(regions[0].taxels.size() == 1);
    CHECK(regions[0].taxels[0] == TaxelRef{0, 0});
  }

  SUBCASE("two distant activations split into two regions") {
    CountFrame f(order.size(), 0.0);
    f[0] = 50.0;                       // triangle 0 channel 0
    f[12] = 40.0;                      // triangle 1 channel 0, 40 mm away
    const auto regions = detect_contacts(f, base, patch, 3.0, 9.0);
    CHECK(regions.size() == 2);
  }

  SUBCASE("neighbors merge into one region") {
    CountFrame f(order.size(), 0.0);
    f[0] = 50.0;
    f[1] = 40.0;  // 6 mm away, inside the adjacency radius
    const auto regions = detect_contacts(f, base, patch, 3.0, 9.0);
    REQUIRE(regions.size() == 1);
    CHECK(regions[0].taxels.size() == 2);
  }
}

TEST_CASE("localize_contact: centroid, symmetry, convex hull") {
  const Patch patch = two_triangle_patch();
  const MaterialModel m = MaterialModel::fabric_2013();
  const CdcParams cdc;

  SUBCASE("single taxel localizes at its own position") {
    ActivationRegion r;
    r.taxels = {{0, 5}};
    r.responses_counts = {30.0};
    const ContactEstimate est = localize_contact(r, patch, m, cdc);
    const Vec2 want = taxel_world_position(patch, 0, 5);
    CHECK(est.centroid_mm.x == doctest::Approx(want.x));
    CHECK(est.centroid_mm.y == doctest::Approx(want.y));
    CHECK(est.peak_pressure_kpa ==
          doctest::Approx(deltac_to_pressure(30.0 * cdc.lsb_ff, m)));
  }

  SUBCASE("two equal responses localize at the midpoint") {
    ActivationRegion r;
    r.taxels = {{0, 0}, {0, 1}};
    r.responses_counts = {20.0, 20.0};
    const ContactEstimate est = localize_contact(r, patch, m, cdc);
    const Vec2 a = taxel_world_position(patch, 0, 0);
    const Vec2 b = taxel_world_position(patch, 0, 1);
    CHECK(est.centroid_mm.x == doctest::Approx((a.x + b.x) / 2.0));
    CHECK(est.centroid_mm.y == doctest::Approx((a.y + b.y) / 2.0));
  }

  SUBCASE("centroid stays inside the support's bounding box") {
    Rng rng(21);
    for (int trial = 0; trial < 100; ++trial) {
      ActivationRegion r;
      double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
      for (int ch : {0, 1, 4, 5}) {
        r.taxels.push_back({0, ch});
        r.responses_counts.push_back(1.0 + rng.uniform01() * 50.0);
        const Vec2 p = taxel_world_position(patch, 0, ch);
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
      }
      const ContactEstimate est = localize_contact(r, patch, m, cdc);
      CHECK(est.centroid_mm.x >= min_x);
      CHECK(est.centroid_mm.x <= max_x);
      CHECK(est.centroid_mm.y >= min_y);
      CHECK(est.centroid_mm.y <= max_y);
    }
  }
}

TEST_CASE("fit_sensitivity: exact lines and error paths") {
  std::vector<PressureSample> samples;
  const MaterialModel m = MaterialModel::fabric_2013();
  for (double p = 2.0; p <= 160.0; p += 2.0) {
    samples.push_back({p, pressure_to_deltac_static(p, m)});
  }
  const std::vector<PressureRange> ranges = {{2.0, 45.0}, {65.0, 160.0}};
  const auto fits = fit_sensitivity(samples, ranges);
  CHECK(fits[0].slope_ff_per_kpa == doctest::Approx(2.50).epsilon(1e-12));
  CHECK(fits[1].slope_ff_per_kpa == doctest::Approx(0.86).epsilon(1e-12));

  // two points define the slope through them
  const std::vector<PressureSample> two = {{10.0, 20.0}, {20.0, 45.0}};
  const std::vector<PressureRange> one_range = {{0.0, 45.0}};
  CHECK(fit_sensitivity(two, one_range)[0].slope_ff_per_kpa ==
        doctest::Approx(2.5));

  const std::vector<PressureSample> lone = {{10.0, 25.0}};
  CHECK_THROWS_AS(fit_sensitivity(lone, one_range), Error);
}

TEST_CASE("fit_relaxation recovers tau from an exact exponential") {
  const double tau = 4680.0;
  std::vector<double> t, v;
  for (int i = 0; i < 600; ++i) {
    t.push_back(i * 1.0);
    v.push_back(75.0 * std::exp(-t.back() / tau));
  }
  const RelaxationFit fit = fit_relaxation(t, v);
  CHECK(std::abs(fit.tau_s / tau - 1.0) < 1e-6);
  CHECK(fit.sigma0_ff == doctest::Approx(75.0));

  v[300] = 0.0;
  CHECK_THROWS_AS(fit_relaxation(t, v), Error);
  try {
    fit_relaxation(t, v);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonPositiveSeries);
  }
}

TEST_CASE("calibration table text round-trip") {
  const Patch patch = two_triangle_patch();
  CalibrationTable table = CalibrationTable::zeros(patch);
  table.entries[3].gain = 1.23456789012345;
  table.entries[3].residual_rms_counts = 0.707;
  std::ostringstream out;
  table.save(out);
  std::istringstream in(out.str());
  const CalibrationTable back = CalibrationTable::load(in);
  REQUIRE(back.entries.size() == table.entries.size());
  CHECK(back.entries[3].gain == table.entries[3].gain);
  CHECK(back.entries[3].residual_rms_counts ==
        table.entries[3].residual_rms_counts);
  CHECK(back.reference_pad(0) == table.reference_pad(0));

  std::ostringstream out2;
  back.save(out2);
  CHECK(out2.str() == out.str());
}
