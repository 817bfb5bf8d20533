// Copyright 2026 The scenemix Authors
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

#ifndef SCENEMIX__GEOMETRY_HPP_
#define SCENEMIX__GEOMETRY_HPP_

#include <array>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace scenemix
{

/// A single LiDAR return in the ego frame. Reflectivity is normalized to [0, 1].
struct Point
{
  double x{0.0};
  double y{0.0};
  double z{0.0};
  double r{0.0};

  friend bool operator==(const Point &, const Point &) = default;
};

using PointCloud = std::vector<Point>;

/**
 * Yaw-only oriented box. (cx, cy, cz) is the geometric center, l runs along
 * the heading, w is lateral and h vertical.
 */
struct Box3D
{
  double cx{0.0};
  double cy{0.0};
  double cz{0.0};
  double l{1.0};
  double w{1.0};
  double h{1.0};
  double yaw{0.0};

  friend bool operator==(const Box3D &, const Box3D &) = default;
};

struct PolarPosition
{
  double range{0.0};
  double azimuth{0.0};
};

/// Slack applied to the box-frame containment test so that points exactly on
/// a face survive a round trip through a rigid transform.
inline constexpr double kContainmentTolerance = 1e-9;

/// Wraps an angle into [-pi, pi).
double wrap_angle(double a);

/// Absolute wrapped difference |wrap(a - b)|, in [0, pi].
double angle_distance(double a, double b);

Point yaw_rotate(const Point & p, double delta);

PolarPosition to_polar(double x, double y);

/// Heading plus sensor azimuth of the box center, wrapped.
/// Throws ValidationError when the center sits on the sensor origin.
double observing_angle(const Box3D & box);

/// Coordinates of p in the box frame (u along heading, v lateral, s vertical).
std::array<double, 3> to_box_frame(const Point & p, const Box3D & box);

bool contains(const Box3D & box, const Point & p);

/// Containment ignoring z: footprint test in the XY plane.
bool footprint_contains(const Box3D & box, double x, double y);

std::vector<std::size_t> points_in_box(std::span<const Point> cloud, const Box3D & box);

/// Footprint corners, counter-clockwise starting at front-left.
std::array<std::array<double, 2>, 4> footprint_corners(const Box3D & box);

/// True iff the footprints intersect with positive area (separating-axis test).
bool bev_overlap(const Box3D & a, const Box3D & b);

}  // namespace scenemix

#endif  // SCENEMIX__GEOMETRY_HPP_
