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

#include "scenemix/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "scenemix/error.hpp"

namespace scenemix
{

namespace
{
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

double wrap_angle(double a)
{
  double w = a - kTwoPi * std::floor((a + kPi) / kTwoPi);
  // floor rounding can land exactly on +pi
  if (w >= kPi) {
    w -= kTwoPi;
  }
  if (w < -kPi) {
    w = -kPi;
  }
  return w;
}

double angle_distance(double a, double b)
{
  return std::abs(wrap_angle(a - b));
}

Point yaw_rotate(const Point & p, double delta)
{
  if (delta == 0.0) {
    return p;
  }
  const double c = std::cos(delta);
  const double s = std::sin(delta);
  return {c * p.x - s * p.y, s * p.x + c * p.y, p.z, p.r};
}

PolarPosition to_polar(double x, double y)
{
  if (x == 0.0 && y == 0.0) {
    return {0.0, 0.0};
  }
  return {std::hypot(x, y), wrap_angle(std::atan2(y, x))};
}

double observing_angle(const Box3D & box)
{
  if (box.cx == 0.0 && box.cy == 0.0) {
    throw ValidationError("observing angle undefined for a box centered on the sensor");
  }
  return wrap_angle(box.yaw + std::atan2(box.cy, box.cx));
}

std::array<double, 3> to_box_frame(const Point & p, const Box3D & box)
{
  const double dx = p.x - box.cx;
  const double dy = p.y - box.cy;
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  return {c * dx + s * dy, -s * dx + c * dy, p.z - box.cz};
}

bool contains(const Box3D & box, const Point & p)
{
  const auto [u, v, s] = to_box_frame(p, box);
  return std::abs(u) <= 0.5 * box.l + kContainmentTolerance &&
         std::abs(v) <= 0.5 * box.w + kContainmentTolerance &&
         std::abs(s) <= 0.5 * box.h + kContainmentTolerance;
}

bool footprint_contains(const Box3D & box, double x, double y)
{
  const double dx = x - box.cx;
  const double dy = y - box.cy;
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  return std::abs(c * dx + s * dy) <= 0.5 * box.l + kContainmentTolerance &&
         std::abs(-s * dx + c * dy) <= 0.5 * box.w + kContainmentTolerance;
}

std::vector<std::size_t> points_in_box(std::span<const Point> cloud, const Box3D & box)
{
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double hl = 0.5 * box.l + kContainmentTolerance;
  const double hw = 0.5 * box.w + kContainmentTolerance;
  const double hh = 0.5 * box.h + kContainmentTolerance;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double dx = cloud[i].x - box.cx;
    const double dy = cloud[i].y - box.cy;
    if (std::abs(cloud[i].z - box.cz) <= hh && std::abs(c * dx + s * dy) <= hl &&
        std::abs(-s * dx + c * dy) <= hw) {
      out.push_back(i);
    }
  }
  return out;
}

std::array<std::array<double, 2>, 4> footprint_corners(const Box3D & box)
{
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double hl = 0.5 * box.l;
  const double hw = 0.5 * box.w;
  constexpr std::array<std::array<double, 2>, 4> signs{{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};
  std::array<std::array<double, 2>, 4> out{};
  for (std::size_t k = 0; k < 4; ++k) {
    const double u = signs[k][0] * hl;
    const double v = signs[k][1] * hw;
    out[k] = {box.cx + c * u - s * v, box.cy + s * u + c * v};
  }
  return out;
}

namespace
{

// Projection interval of a footprint on the axis (ax, ay).
std::array<double, 2> project(const std::array<std::array<double, 2>, 4> & corners, double ax, double ay)
{
  double lo = corners[0][0] * ax + corners[0][1] * ay;
  double hi = lo;
  for (std::size_t k = 1; k < 4; ++k) {
    const double d = corners[k][0] * ax + corners[k][1] * ay;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return {lo, hi};
}

}  // namespace

bool bev_overlap(const Box3D & a, const Box3D & b)
{
  const auto ca = footprint_corners(a);
  const auto cb = footprint_corners(b);
  const std::array<double, 4> yaws{a.yaw, a.yaw + 0.5 * kPi, b.yaw, b.yaw + 0.5 * kPi};
  for (const double yaw : yaws) {
    const double ax = std::cos(yaw);
    const double ay = std::sin(yaw);
    const auto pa = project(ca, ax, ay);
    const auto pb = project(cb, ax, ay);
    // touching intervals have zero-area contact
    if (pa[1] <= pb[0] || pb[1] <= pa[0]) {
      return false;
    }
  }
  return true;
}

}  // namespace scenemix
