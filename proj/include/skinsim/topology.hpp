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

#ifndef SKINSIM_TOPOLOGY_HPP_
#define SKINSIM_TOPOLOGY_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "skinsim/geometry.hpp"
#include "skinsim/material.hpp"

namespace skinsim {

inline constexpr int kChannelsPerTriangle = 12;
inline constexpr int kThermalChannelA = 6;
inline constexpr int kThermalChannelB = 7;
inline constexpr int kMaxTrianglesPerPatch = 16;
inline constexpr double kTriangleSideMm = 30.0;
inline constexpr double kPressureTaxelAreaMm2 = 15.20;
inline constexpr double kThermalPadAreaMm2 = 12.56;
// pressure taxels sit on a triangular lattice with this pitch; the template
// offsets are chosen so that 180-degree rotated modules in a tiling continue
// the same global lattice
inline constexpr double kTaxelPitchMm = 6.0;

enum class TaxelKind { kPressure, kThermal };

struct TaxelDescriptor {
  int triangle_id = 0;
  int channel = 0;  // 0..11
  TaxelKind kind = TaxelKind::kPressure;
  Vec2 position_mm;  // triangle-local frame
  double area_mm2 = kPressureTaxelAreaMm2;
  int drift_group = 1;  // 1..5 pressure families, 6..7 thermal pads
};

struct TriangleModule {
  int id = 0;
  Pose2 pose;  // triangle-local -> patch frame
  int i2c_bus = 0;   // 0..3
  int i2c_addr = 0;  // 0..3
  std::array<TaxelDescriptor, kChannelsPerTriangle> taxels;
};

struct TaxelRef {
  int triangle_id = 0;
  int channel = 0;

  bool operator==(const TaxelRef&) const = default;
  auto operator<=>(const TaxelRef&) const = default;
};

struct Patch {
  int id = 0;
  std::vector<TriangleModule> triangles;
  double dielectric_thickness_mm = 2.0;

  const TriangleModule* find_triangle(int triangle_id) const;
  int taxel_count() const {
    return static_cast<int>(triangles.size()) * kChannelsPerTriangle;
  }
};

struct SkinConfig {
  std::vector<Patch> patches;
  MaterialModel material;
  CdcParams cdc;
  double sample_rate_hz = 25.0;
  std::uint64_t rng_seed = 1;
};

// placement and addressing for one triangle in a layout
struct TriangleLayout {
  int id = 0;
  Pose2 pose;
  int i2c_bus = 0;
  int i2c_addr = 0;
};

// the single source of truth for taxel-local coordinates; all triangles are
// instantiated from this template
const std::array<TaxelDescriptor, kChannelsPerTriangle>& canonical_taxels();

// corners of the triangle outline in the local frame
std::array<Vec2, 3> triangle_outline();

// throws DuplicateAddress / TooManyTriangles / MalformedLayout
Patch build_patch(int patch_id, const std::vector<TriangleLayout>& layout,
                  double dielectric_thickness_mm = 2.0);

// throws UnknownTaxel
Vec2 taxel_world_position(const Patch& patch, int triangle_id, int channel);

struct TaxelHit {
  TaxelRef ref;
  double distance_mm = 0.0;
};

// every taxel with world position within radius of point, sorted by
// (distance, triangle_id, channel)
std::vector<TaxelHit> taxels_within_radius(const Patch& patch,
                                           const Vec2& point_mm,
                                           double radius_mm);

struct Violation {
  std::string path;
  std::string reason;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_config(const SkinConfig& config);

// layout presets; both are 16-module meshes
std::vector<TriangleLayout> flat_prototype_layout();
std::vector<TriangleLayout> icub_forearm_layout();
Patch make_preset_patch(const std::string& name, int patch_id = 0);

}  // namespace skinsim

#endif  // SKINSIM_TOPOLOGY_HPP_
