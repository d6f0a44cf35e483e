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

#include <algorithm>
#include <cmath>
#include <set>

#include <doctest.h>

#include "skinsim/config.hpp"
#include "skinsim/error.hpp"
#include "skinsim/topology.hpp"
#include "skinsim/util.hpp"

using namespace skinsim;

namespace {

std::vector<TriangleLayout> single_triangle_layout() {
  TriangleLayout l;
  l.id = 0;
  return {l};
}

}  // namespace

TEST_CASE("canonical template: 12 channels, 2 thermal pads, areas") {
  const auto& taxels = canonical_taxels();
  int thermal = 0;
  std::set<int> channels;
  for (const TaxelDescriptor& t : taxels) {
    channels.insert(t.channel);
    if (t.kind == TaxelKind::kThermal) {
      ++thermal;
      CHECK(t.area_mm2 == doctest::Approx(12.56));
      CHECK((t.drift_group == 6 || t.drift_group == 7));
      CHECK((t.channel == 6 || t.channel == 7));
    } else {
      CHECK(t.area_mm2 == doctest::Approx(15.20));
      CHECK(t.drift_group >= 1);
      CHECK(t.drift_group <= 5);
    }
  }
  CHECK(thermal == 2);
  CHECK(channels.size() == 12);
}

TEST_CASE("build_patch minimal and full configurations") {
  const Patch one = build_patch(0, single_triangle_layout());
  CHECK(one.triangles.size() == 1);
  CHECK(one.taxel_count() == 12);

  const Patch full = build_patch(0, flat_prototype_layout());
  CHECK(full.triangles.size() == 16);

  // 17 triangles must be rejected
  std::vector<TriangleLayout> too_many = flat_prototype_layout();
  TriangleLayout extra;
  extra.id = 99;
  extra.i2c_bus = 0;
  extra.i2c_addr = 0;
  too_many.push_back(extra);
  CHECK_THROWS_AS(build_patch(0, too_many), Error);
  try {
    build_patch(0, too_many);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTooManyTriangles);
  }
}

TEST_CASE("build_patch rejects duplicate addresses") {
  std::vector<TriangleLayout> layout = single_triangle_layout();
  TriangleLayout dup;
  dup.id = 1;
  dup.i2c_bus = 0;
  dup.i2c_addr = 0;
  layout.push_back(dup);
  try {
    build_patch(0, layout);
    FAIL("expected DuplicateAddress");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDuplicateAddress);
  }
}

TEST_CASE("taxel_world_position applies the rigid transform") {
  std::vector<TriangleLayout> layout = single_triangle_layout();
  Patch p = build_patch(0, layout);
  const Vec2 local = canonical_taxels()[0].position_mm;

  // identity
  Vec2 w = taxel_world_position(p, 0, 0);
  CHECK(w.x == doctest::Approx(local.x));
  CHECK(w.y == doctest::Approx(local.y));

  // pure translation
  layout[0].pose = {10.0, 0.0, 0.0};
  p = build_patch(0, layout);
  w = taxel_world_position(p, 0, 0);
  CHECK(w.x == doctest::Approx(local.x + 10.0));
  CHECK(w.y == doctest::Approx(local.y));

  // 90 degree rotation about the origin maps (x, y) to (-y, x)
  layout[0].pose = {0.0, 0.0, M_PI / 2.0};
  p = build_patch(0, layout);
  w = taxel_world_position(p, 0, 0);
  CHECK(w.x == doctest::Approx(-local.y));
  CHECK(w.y == doctest::Approx(local.x));

  CHECK_THROWS_AS(taxel_world_position(p, 5, 0), Error);
  CHECK_THROWS_AS(taxel_world_position(p, 0, 12), Error);
}

TEST_CASE("pairwise taxel distances are pose-invariant") {
  std::vector<TriangleLayout> layout = single_triangle_layout();
  const Patch identity = build_patch(0, layout);
  layout[0].pose = {17.3, -4.2, 1.234};
  const Patch moved = build_patch(0, layout);
  for (int a = 0; a < 12; ++a) {
    for (int b = a + 1; b < 12; ++b) {
      const double d0 = distance(taxel_world_position(identity, 0, a),
                                 taxel_world_position(identity, 0, b));
      const double d1 = distance(taxel_world_position(moved, 0, a),
                                 taxel_world_position(moved, 0, b));
      CHECK(d0 == doctest::Approx(d1).epsilon(1e-12));
    }
  }
}

TEST_CASE("taxels_within_radius against a brute-force distance scan") {
  const Patch p = build_patch(0, flat_prototype_layout());

  // radius 0 at a taxel's exact position returns that taxel only
  const Vec2 at = taxel_world_position(p, 8, 5);
  const auto exact = taxels_within_radius(p, at, 0.0);
  REQUIRE(exact.size() == 1);
  CHECK(exact[0].ref == TaxelRef{8, 5});

  // radius beyond the patch extent returns every taxel
  CHECK(taxels_within_radius(p, at, 1e4).size() == 16 * 12);

  // oracle: brute-force sorted distances from an off-taxel probe point
  const Vec2 probe{at.x + 0.4, at.y + 0.3};
  std::vector<double> dists;
  for (const TriangleModule& tri : p.triangles) {
    for (const TaxelDescriptor& t : tri.taxels) {
      dists.push_back(distance(tri.pose.apply(t.position_mm), probe));
    }
  }
  std::sort(dists.begin(), dists.end());
  REQUIRE(dists[1] > dists[0] + 1e-9);
  const double radius = 0.5 * (dists[0] + dists[1]);
  const auto hits = taxels_within_radius(p, probe, radius);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].distance_mm == doctest::Approx(dists[0]));

  // results are sorted by distance
  const auto all = taxels_within_radius(p, probe, 25.0);
  for (std::size_t i = 1; i < all.size(); ++i) {
    CHECK(all[i - 1].distance_mm <= all[i].distance_mm);
  }
}

TEST_CASE("pressure taxels of the tiled prototype share one lattice") {
  // the template is chosen so that rotated modules continue the same
  // pitch-6 triangular lattice; nearest pressure-taxel spacing must be
  // exactly the pitch everywhere
  const Patch p = build_patch(0, flat_prototype_layout());
  std::vector<Vec2> pts;
  for (const TriangleModule& tri : p.triangles) {
    for (const TaxelDescriptor& t : tri.taxels) {
      if (t.kind == TaxelKind::kPressure) {
        pts.push_back(tri.pose.apply(t.position_mm));
      }
    }
  }
  CHECK(pts.size() == 160);
  double min_nn = 1e300, max_nn = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double nn = 1e300;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i != j) nn = std::min(nn, distance(pts[i], pts[j]));
    }
    min_nn = std::min(min_nn, nn);
    max_nn = std::max(max_nn, nn);
  }
  CHECK(min_nn == doctest::Approx(kTaxelPitchMm).epsilon(1e-9));
  CHECK(max_nn == doctest::Approx(kTaxelPitchMm).epsilon(1e-9));
}

TEST_CASE("validate_config accepts constructor output") {
  SkinConfig config = default_config("flat-prototype");
  CHECK(validate_config(config).ok());

  config = default_config("icub-forearm");
  CHECK(validate_config(config).ok());
}

TEST_CASE("validate_config flags violations as data") {
  SkinConfig config = default_config();

  SUBCASE("three thermal pads") {
    config.patches[0].triangles[0].taxels[5].kind = TaxelKind::kThermal;
    config.patches[0].triangles[0].taxels[5].drift_group = 6;
    const auto report = validate_config(config);
    REQUIRE_FALSE(report.ok());
    bool found = false;
    for (const Violation& v : report.violations) {
      if (v.reason.find("thermal-pad count") != std::string::npos) found = true;
    }
    CHECK(found);
  }

  SUBCASE("zero sample rate") {
    config.sample_rate_hz = 0.0;
    const auto report = validate_config(config);
    REQUIRE_FALSE(report.ok());
    CHECK(report.violations[0].path == "sample_rate");
  }

  SUBCASE("taxel outside the outline") {
    config.patches[0].triangles[0].taxels[0].position_mm = {-5.0, -5.0};
    CHECK_FALSE(validate_config(config).ok());
  }

  SUBCASE("duplicate bus/addr") {
    config.patches[0].triangles[1].i2c_bus =
        config.patches[0].triangles[0].i2c_bus;
    config.patches[0].triangles[1].i2c_addr =
        config.patches[0].triangles[0].i2c_addr;
    CHECK_FALSE(validate_config(config).ok());
  }
}
