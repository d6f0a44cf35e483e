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

#include "skinsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "skinsim/error.hpp"

namespace skinsim {
namespace {

constexpr double kSqrt3 = 1.7320508075688772;

TaxelDescriptor make_taxel(int channel, TaxelKind kind, Vec2 pos, int group) {
  TaxelDescriptor t;
  t.triangle_id = 0;
  t.channel = channel;
  t.kind = kind;
  t.position_mm = pos;
  t.area_mm2 =
      kind == TaxelKind::kPressure ? kPressureTaxelAreaMm2 : kThermalPadAreaMm2;
  t.drift_group = group;
  return t;
}

std::array<TaxelDescriptor, kChannelsPerTriangle> build_template() {
  // pressure taxels on the pitch-6 lattice, rows of 4/3/2/1 from the base;
  // drift groups pair taxels symmetric about the bisector x = 15
  const double r0 = 3.0 * kSqrt3;        // 5.196
  const double r1 = 6.0 * kSqrt3;        // 10.392
  const double r2 = 9.0 * kSqrt3;        // 15.588
  const double r3 = 12.0 * kSqrt3;       // 20.785
  const double pad_y = 4.5 * kSqrt3;     // 7.794
  std::array<TaxelDescriptor, kChannelsPerTriangle> t = {
      make_taxel(0, TaxelKind::kPressure, {6.0, r0}, 1),
      make_taxel(1, TaxelKind::kPressure, {12.0, r0}, 2),
      make_taxel(2, TaxelKind::kPressure, {18.0, r0}, 2),
      make_taxel(3, TaxelKind::kPressure, {24.0, r0}, 1),
      make_taxel(4, TaxelKind::kPressure, {9.0, r1}, 3),
      make_taxel(5, TaxelKind::kPressure, {15.0, r1}, 4),
      make_taxel(6, TaxelKind::kThermal, {10.5, pad_y}, 6),
      make_taxel(7, TaxelKind::kThermal, {19.5, pad_y}, 7),
      make_taxel(8, TaxelKind::kPressure, {21.0, r1}, 3),
      make_taxel(9, TaxelKind::kPressure, {12.0, r2}, 5),
      make_taxel(10, TaxelKind::kPressure, {18.0, r2}, 5),
      make_taxel(11, TaxelKind::kPressure, {15.0, r3}, 4),
  };
  return t;
}

// signed-area barycentric test with a small tolerance
bool inside_triangle(const Vec2& p, const std::array<Vec2, 3>& v, double tol) {
  for (int i = 0; i < 3; ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % 3];
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    if (cross < tol) return false;
  }
  return true;
}

}  // namespace

const std::array<TaxelDescriptor, kChannelsPerTriangle>& canonical_taxels() {
  static const std::array<TaxelDescriptor, kChannelsPerTriangle> t =
      build_template();
  return t;
}

std::array<Vec2, 3> triangle_outline() {
  return {Vec2{0.0, 0.0}, Vec2{kTriangleSideMm, 0.0},
          Vec2{kTriangleSideMm * 0.5, kTriangleSideMm * 0.5 * kSqrt3}};
}

const TriangleModule* Patch::find_triangle(int triangle_id) const {
  for (const TriangleModule& t : triangles) {
    if (t.id == triangle_id) return &t;
  }
  return nullptr;
}

Patch build_patch(int patch_id, const std::vector<TriangleLayout>& layout,
                  double dielectric_thickness_mm) {
  if (layout.empty()) {
    throw Error(ErrorCode::kMalformedLayout, "layout names no triangles");
  }
  if (layout.size() > kMaxTrianglesPerPatch) {
    throw Error(ErrorCode::kTooManyTriangles,
                "layout names " + std::to_string(layout.size()) +
                    " triangles, limit is 16");
  }
  if (dielectric_thickness_mm <= 0.0) {
    throw Error(ErrorCode::kMalformedLayout, "dielectric thickness <= 0");
  }

  std::set<std::pair<int, int>> addresses;
  std::set<int> ids;
  Patch patch;
  patch.id = patch_id;
  patch.dielectric_thickness_mm = dielectric_thickness_mm;
  patch.triangles.reserve(layout.size());

  for (const TriangleLayout& l : layout) {
    if (l.i2c_bus < 0 || l.i2c_bus > 3 || l.i2c_addr < 0 || l.i2c_addr > 3) {
      throw Error(ErrorCode::kMalformedLayout,
                  "triangle " + std::to_string(l.id) +
                      ": bus/addr outside 0..3");
    }
    if (!addresses.insert({l.i2c_bus, l.i2c_addr}).second) {
      throw Error(ErrorCode::kDuplicateAddress,
                  "bus " + std::to_string(l.i2c_bus) + " addr " +
                      std::to_string(l.i2c_addr) + " used twice");
    }
    if (!ids.insert(l.id).second) {
      throw Error(ErrorCode::kMalformedLayout,
                  "triangle id " + std::to_string(l.id) + " used twice");
    }
    TriangleModule tri;
    tri.id = l.id;
    tri.pose = l.pose;
    tri.i2c_bus = l.i2c_bus;
    tri.i2c_addr = l.i2c_addr;
    tri.taxels = canonical_taxels();
    for (TaxelDescriptor& t : tri.taxels) t.triangle_id = l.id;
    patch.triangles.push_back(std::move(tri));
  }
  return patch;
}

Vec2 taxel_world_position(const Patch& patch, int triangle_id, int channel) {
  const TriangleModule* tri = patch.find_triangle(triangle_id);
  if (tri == nullptr || channel < 0 || channel >= kChannelsPerTriangle) {
    throw Error(ErrorCode::kUnknownTaxel,
                "triangle " + std::to_string(triangle_id) + " channel " +
                    std::to_string(channel));
  }
  return tri->pose.apply(tri->taxels[channel].position_mm);
}

std::vector<TaxelHit> taxels_within_radius(const Patch& patch,
                                           const Vec2& point_mm,
                                           double radius_mm) {
  std::vector<TaxelHit> hits;
  for (const TriangleModule& tri : patch.triangles) {
    for (const TaxelDescriptor& t : tri.taxels) {
      const double d = distance(tri.pose.apply(t.position_mm), point_mm);
      if (d <= radius_mm) hits.push_back({{tri.id, t.channel}, d});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const TaxelHit& a, const TaxelHit& b) {
    if (a.distance_mm != b.distance_mm) return a.distance_mm < b.distance_mm;
    return a.ref < b.ref;
  });
  return hits;
}

ValidationReport validate_config(const SkinConfig& config) {
  ValidationReport report;
  auto add = [&report](std::string path, std::string reason) {
    report.violations.push_back({std::move(path), std::move(reason)});
  };

  if (config.sample_rate_hz <= 0.0) {
    add("sample_rate", "sample rate must be > 0");
  }

  // material invariants
  {
    const auto& segs = config.material.sensitivity_segments;
    if (segs.empty()) add("material.sensitivity_segments", "empty table");
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const std::string p =
          "material.sensitivity_segments[" + std::to_string(i) + "]";
      if (segs[i].slope_ff_per_kpa <= 0.0) add(p, "slope must be > 0");
      if (segs[i].p_hi_kpa <= segs[i].p_lo_kpa) add(p, "empty pressure range");
      if (i > 0 && segs[i].p_lo_kpa < segs[i - 1].p_hi_kpa) {
        add(p, "ranges overlap or are out of order");
      }
    }
    if (!segs.empty() && segs.front().p_lo_kpa != 0.0) {
      add("material.sensitivity_segments[0]", "first range must start at 0");
    }
    const MaterialModel& m = config.material;
    if (m.hysteresis_gap_fraction < 0.0 || m.hysteresis_gap_fraction >= 1.0) {
      add("material.hysteresis_gap_fraction", "must be in [0, 1)");
    }
    if (m.hysteresis_peak_ratio < 0.0 || m.hysteresis_peak_ratio > 1.0) {
      add("material.hysteresis_peak_ratio", "must be in [0, 1]");
    }
    if (m.relaxation_tau_s <= 0.0) add("material.relaxation_tau", "must be > 0");
    if (m.compressive_modulus_kpa <= 0.0) {
      add("material.compressive_modulus", "must be > 0");
    }
  }

  if (config.cdc.lsb_ff <= 0.0) add("cdc.lsb_size", "must be > 0");
  if (config.cdc.averaging_window < 1) {
    add("cdc.averaging_window", "must be >= 1");
  }

  const auto outline = triangle_outline();
  for (std::size_t pi = 0; pi < config.patches.size(); ++pi) {
    const Patch& patch = config.patches[pi];
    const std::string pp = "patches[" + std::to_string(pi) + "]";
    if (patch.triangles.empty() ||
        patch.triangles.size() > kMaxTrianglesPerPatch) {
      add(pp + ".triangles", "triangle count must be 1..16");
    }
    if (patch.dielectric_thickness_mm <= 0.0) {
      add(pp + ".dielectric_thickness", "must be > 0");
    }
    std::set<std::pair<int, int>> addresses;
    std::set<int> ids;
    for (std::size_t ti = 0; ti < patch.triangles.size(); ++ti) {
      const TriangleModule& tri = patch.triangles[ti];
      const std::string tp = pp + ".triangles[" + std::to_string(ti) + "]";
      if (!ids.insert(tri.id).second) add(tp + ".id", "duplicate triangle id");
      if (tri.i2c_bus < 0 || tri.i2c_bus > 3 || tri.i2c_addr < 0 ||
          tri.i2c_addr > 3) {
        add(tp, "bus/addr outside 0..3");
      } else if (!addresses.insert({tri.i2c_bus, tri.i2c_addr}).second) {
        add(tp, "duplicate (bus, addr) within patch");
      }

      std::set<int> channels;
      int thermal_count = 0;
      for (const TaxelDescriptor& t : tri.taxels) {
        const std::string xp = tp + ".channel" + std::to_string(t.channel);
        if (t.channel < 0 || t.channel >= kChannelsPerTriangle ||
            !channels.insert(t.channel).second) {
          add(xp, "channels 0..11 must each appear once");
        }
        if (t.kind == TaxelKind::kThermal) ++thermal_count;
        if (t.area_mm2 <= 0.0) add(xp, "area must be > 0");
        if (!inside_triangle(t.position_mm, outline, 1e-9)) {
          add(xp, "taxel position outside triangle outline");
        }
        const bool group_ok = t.kind == TaxelKind::kThermal
                                  ? (t.drift_group == 6 || t.drift_group == 7)
                                  : (t.drift_group >= 1 && t.drift_group <= 5);
        if (!group_ok) add(xp, "drift group inconsistent with taxel kind");
      }
      if (thermal_count != 2) {
        add(tp, "thermal-pad count must be exactly 2, got " +
                    std::to_string(thermal_count));
      }
    }
  }
  return report;
}

std::vector<TriangleLayout> flat_prototype_layout() {
  // 16 modules tiling an equilateral triangle of side 120: rows of
  // 4/3/2/1 upward modules with 3/2/1 rotated modules between them
  const double h = kTriangleSideMm * 0.5 * kSqrt3;
  std::vector<TriangleLayout> layout;
  int index = 0;
  auto push = [&layout, &index](double tx, double ty, double theta) {
    TriangleLayout l;
    l.id = index;
    l.pose = {tx, ty, theta};
    l.i2c_bus = index / 4;
    l.i2c_addr = index % 4;
    layout.push_back(l);
    ++index;
  };
  for (int j = 0; j < 4; ++j) {
    for (int k = 0; k < 4 - j; ++k) {
      push(15.0 * j + 30.0 * k, h * j, 0.0);
    }
    for (int k = 0; k < 3 - j; ++k) {
      push(45.0 + 30.0 * k + 15.0 * j, h * (j + 1), M_PI);
    }
  }
  return layout;
}

std::vector<TriangleLayout> icub_forearm_layout() {
  // developable strip of 8 module pairs approximating the forearm wrap
  const double h = kTriangleSideMm * 0.5 * kSqrt3;
  std::vector<TriangleLayout> layout;
  for (int k = 0; k < 8; ++k) {
    TriangleLayout up;
    up.id = 2 * k;
    up.pose = {30.0 * k, 0.0, 0.0};
    up.i2c_bus = (2 * k) / 4;
    up.i2c_addr = (2 * k) % 4;
    layout.push_back(up);
    TriangleLayout down;
    down.id = 2 * k + 1;
    down.pose = {30.0 * k + 45.0, h, M_PI};
    down.i2c_bus = (2 * k + 1) / 4;
    down.i2c_addr = (2 * k + 1) % 4;
    layout.push_back(down);
  }
  return layout;
}

Patch make_preset_patch(const std::string& name, int patch_id) {
  if (name == "flat-prototype") {
    return build_patch(patch_id, flat_prototype_layout());
  }
  if (name == "icub-forearm") {
    return build_patch(patch_id, icub_forearm_layout());
  }
  throw Error(ErrorCode::kConfigInvalid, "unknown patch preset: " + name);
}

}  // namespace skinsim
