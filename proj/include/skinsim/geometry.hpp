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

#ifndef SKINSIM_GEOMETRY_HPP_
#define SKINSIM_GEOMETRY_HPP_

#include <cmath>

namespace skinsim {

// 2D point/vector, millimeters throughout.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// rigid transform in the plane: rotation by theta, then translation
struct Pose2 {
  double tx = 0.0;
  double ty = 0.0;
  double theta = 0.0;  // radians

  Vec2 apply(const Vec2& p) const {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {tx + c * p.x - s * p.y, ty + s * p.x + c * p.y};
  }
};

}  // namespace skinsim

#endif  // SKINSIM_GEOMETRY_HPP_
