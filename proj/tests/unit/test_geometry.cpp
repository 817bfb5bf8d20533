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

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "scenemix/error.hpp"
#include "scenemix/geometry.hpp"
#include "scenemix/rng.hpp"

using namespace scenemix;

namespace
{

constexpr double kPi = std::numbers::pi;

Box3D random_box(Rng & rng, double spread)
{
  Box3D b;
  b.cx = rng.uniform(-spread, spread);
  b.cy = rng.uniform(-spread, spread);
  b.cz = rng.uniform(-2.0, 1.0);
  b.l = rng.uniform(0.4, 5.0);
  b.w = rng.uniform(0.4, 3.0);
  b.h = rng.uniform(0.5, 3.0);
  b.yaw = rng.uniform(-kPi, kPi);
  return b;
}

// Corners from first principles, counter-clockwise.
std::array<std::array<double, 2>, 4> corners_oracle(const Box3D & b)
{
  const double c = std::cos(b.yaw);
  const double s = std::sin(b.yaw);
  const double hl = b.l / 2;
  const double hw = b.w / 2;
  const double local[4][2] = {{hl, hw}, {-hl, hw}, {-hl, -hw}, {hl, -hw}};
  std::array<std::array<double, 2>, 4> out{};
  for (int k = 0; k < 4; ++k) {
    out[k] = {b.cx + c * local[k][0] - s * local[k][1], b.cy + s * local[k][0] + c * local[k][1]};
  }
  return out;
}

// Inside iff on the inner side of every footprint edge and within the vertical slab.
bool halfspace_inside(const Box3D & b, const Point & p)
{
  const auto q = corners_oracle(b);
  for (int k = 0; k < 4; ++k) {
    const auto & a = q[k];
    const auto & n = q[(k + 1) % 4];
    const double cross = (n[0] - a[0]) * (p.y - a[1]) - (n[1] - a[1]) * (p.x - a[0]);
    if (cross < 0.0) {
      return false;
    }
  }
  return std::abs(p.z - b.cz) <= b.h / 2;
}

double segment_distance(const std::array<double, 2> & p, const std::array<double, 2> & a, const std::array<double, 2> & b)
{
  const double dx = b[0] - a[0];
  const double dy = b[1] - a[1];
  double t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy);
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy));
}

// Distance between two disjoint convex quads: closest vertex-edge pair.
double polygon_gap(const Box3D & a, const Box3D & b)
{
  const auto qa = corners_oracle(a);
  const auto qb = corners_oracle(b);
  double best = 1e300;
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 4; ++k) {
      best = std::min(best, segment_distance(qa[i], qb[k], qb[(k + 1) % 4]));
      best = std::min(best, segment_distance(qb[i], qa[k], qa[(k + 1) % 4]));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("yaw_rotate")
{
  const Point q = yaw_rotate({1, 0, 0, 0.4}, kPi / 2);
  CHECK(std::abs(q.x) < 1e-9);
  CHECK(std::abs(q.y - 1.0) < 1e-9);
  CHECK(q.z == 0.0);
  CHECK(q.r == 0.4);

  const Point p{0.3, -1.2, 0.5, 0.25};
  CHECK(yaw_rotate(p, 0.0) == p);

  const double d = 0.7;
  const double m[2][2] = {{std::cos(d), -std::sin(d)}, {std::sin(d), std::cos(d)}};
  const Point r = yaw_rotate(p, d);
  CHECK(std::abs(r.x - (m[0][0] * p.x + m[0][1] * p.y)) < 1e-9);
  CHECK(std::abs(r.y - (m[1][0] * p.x + m[1][1] * p.y)) < 1e-9);
  CHECK(r.z == p.z);
  CHECK(r.r == p.r);
}

TEST_CASE("yaw_rotate preserves norms and pairwise distances")
{
  Rng rng(11);
  std::vector<Point> pts;
  for (int i = 0; i < 50; ++i) {
    pts.push_back({rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-3, 3), rng.uniform()});
  }
  for (int trial = 0; trial < 20; ++trial) {
    const double d = rng.uniform(-10, 10);
    std::vector<Point> rot;
    for (const Point & p : pts) {
      rot.push_back(yaw_rotate(p, d));
      CHECK(std::abs(std::hypot(rot.back().x, rot.back().y) - std::hypot(p.x, p.y)) < 1e-9);
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        const double before = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y, pts[i].z - pts[j].z);
        const double after = std::hypot(rot[i].x - rot[j].x, rot[i].y - rot[j].y, rot[i].z - rot[j].z);
        CHECK(std::abs(before - after) < 1e-9);
      }
    }
  }
}

TEST_CASE("wrap_angle uses [-pi, pi)")
{
  CHECK(wrap_angle(kPi) == -kPi);
  CHECK(wrap_angle(-kPi) == -kPi);
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(std::abs(wrap_angle(3 * kPi / 2) + kPi / 2) < 1e-12);
  CHECK(std::abs(wrap_angle(-7.0) - (-7.0 + 2 * kPi)) < 1e-12);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double a = wrap_angle(rng.uniform(-100, 100));
    CHECK(a >= -kPi);
    CHECK(a < kPi);
  }
  CHECK(std::abs(angle_distance(kPi - 0.1, -kPi + 0.1) - 0.2) < 1e-12);
}

TEST_CASE("to_polar")
{
  const PolarPosition p = to_polar(3, 4);
  CHECK(p.range == 5.0);
  CHECK(p.azimuth == std::atan2(4.0, 3.0));

  const PolarPosition back = to_polar(-1, 0);
  CHECK(back.range == 1.0);
  CHECK(back.azimuth == -kPi);

  const PolarPosition o = to_polar(0, 0);
  CHECK(o.range == 0.0);
  CHECK(o.azimuth == 0.0);

  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double r = rng.uniform(0.01, 100);
    const double a = rng.uniform(-kPi, kPi);
    const PolarPosition q = to_polar(r * std::cos(a), r * std::sin(a));
    CHECK(std::abs(q.range - r) < 1e-9);
    CHECK(angle_distance(q.azimuth, a) < 1e-9);
  }
}

TEST_CASE("observing_angle")
{
  CHECK(std::abs(observing_angle({5, 0, 0, 1, 1, 1, kPi / 4}) - kPi / 4) < 1e-12);
  CHECK(std::abs(observing_angle({0, 5, 0, 1, 1, 1, -kPi / 2})) < 1e-12);

  const Box3D b{3, 4, 0, 4, 2, 1.5, 0.2};
  const double obs = observing_angle(b);
  CHECK(angle_distance(obs, 0.2 + std::atan2(4.0, 3.0)) < 1e-9);
  // every pose on the circle that keeps heading + azimuth reproduces the same value
  for (int k = 0; k < 360; ++k) {
    const double heading = -kPi + k * (2 * kPi / 360);
    const double az = obs - heading;
    Box3D moved = b;
    moved.cx = 5 * std::cos(az);
    moved.cy = 5 * std::sin(az);
    moved.yaw = heading;
    CHECK(angle_distance(observing_angle(moved), obs) < 1e-9);
  }
  CHECK_THROWS_AS(observing_angle({0, 0, 0, 1, 1, 1, 0}), ValidationError);
}

TEST_CASE("points_in_box boundary cases")
{
  const Box3D b{2, -1, 0.5, 4, 2, 1.5, 0.6};
  CHECK(contains(b, {b.cx, b.cy, b.cz, 0}));
  const double c = std::cos(b.yaw);
  const double s = std::sin(b.yaw);
  const double u = b.l / 2 + 1e-3;
  CHECK_FALSE(contains(b, {b.cx + c * u, b.cy + s * u, b.cz, 0}));
  const double u_in = b.l / 2 - 1e-6;
  CHECK(contains(b, {b.cx + c * u_in, b.cy + s * u_in, b.cz, 0}));

  const Box3D axis{0, 0, 0, 2, 2, 2, 0};
  CHECK(contains(axis, {1, 1, 1, 0}));
  CHECK(contains(axis, {-1, -1, -1, 0}));
  CHECK_FALSE(contains(axis, {1.001, 0, 0, 0}));
  CHECK_FALSE(contains(axis, {0, 0, -1.001, 0}));
}

TEST_CASE("points_in_box matches a corner halfspace oracle")
{
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Box3D b = random_box(rng, 5.0);
    PointCloud cloud;
    for (int i = 0; i < 1000; ++i) {
      cloud.push_back({b.cx + rng.uniform(-3, 3), b.cy + rng.uniform(-3, 3), b.cz + rng.uniform(-2, 2), rng.uniform()});
    }
    std::vector<std::size_t> expected;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (halfspace_inside(b, cloud[i])) {
        expected.push_back(i);
      }
    }
    CHECK(points_in_box(cloud, b) == expected);
  }
}

TEST_CASE("points_in_box is invariant under a shared rigid transform")
{
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Box3D b = random_box(rng, 20.0);
    PointCloud cloud;
    for (int i = 0; i < 400; ++i) {
      cloud.push_back({b.cx + rng.uniform(-3, 3), b.cy + rng.uniform(-3, 3), b.cz + rng.uniform(-2, 2), 0});
    }
    const double d = rng.uniform(-kPi, kPi);
    const double tx = rng.uniform(-30, 30);
    const double ty = rng.uniform(-30, 30);
    const double tz = rng.uniform(-1, 1);
    PointCloud moved;
    for (const Point & p : cloud) {
      Point q = yaw_rotate(p, d);
      moved.push_back({q.x + tx, q.y + ty, q.z + tz, q.r});
    }
    const Point c = yaw_rotate({b.cx, b.cy, b.cz, 0}, d);
    const Box3D mb{c.x + tx, c.y + ty, c.z + tz, b.l, b.w, b.h, wrap_angle(b.yaw + d)};
    CHECK(points_in_box(cloud, b) == points_in_box(moved, mb));
  }
}

TEST_CASE("footprint_corners")
{
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const Box3D b = random_box(rng, 10);
    const auto got = footprint_corners(b);
    const auto want = corners_oracle(b);
    for (int k = 0; k < 4; ++k) {
      CHECK(std::abs(got[k][0] - want[k][0]) < 1e-9);
      CHECK(std::abs(got[k][1] - want[k][1]) < 1e-9);
    }
  }
}

TEST_CASE("bev_overlap basic cases")
{
  const Box3D a{0, 0, 0, 1, 1, 1, 0};
  CHECK(bev_overlap(a, a));
  CHECK_FALSE(bev_overlap(a, {10, 0, 0, 1, 1, 1, 0}));
  // vertical separation is ignored
  CHECK(bev_overlap(a, {0.2, 0.2, 50, 1, 1, 1, 0.3}));
  // a rotated square whose corner pokes into the other
  CHECK(bev_overlap(a, {1.1, 0, 0, 1, 1, 1, kPi / 4}));
  CHECK_FALSE(bev_overlap(a, {1.3, 0, 0, 1, 1, 1, kPi / 4}));
}

TEST_CASE("bev_overlap symmetry and translation invariance")
{
  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    const Box3D a = random_box(rng, 3);
    const Box3D b = random_box(rng, 3);
    const bool v = bev_overlap(a, b);
    CHECK(v == bev_overlap(b, a));
    CHECK(bev_overlap(a, a));
    const double tx = rng.uniform(-100, 100);
    const double ty = rng.uniform(-100, 100);
    Box3D at = a;
    Box3D bt = b;
    at.cx += tx;
    at.cy += ty;
    bt.cx += tx;
    bt.cy += ty;
    if (polygon_gap(a, b) > 1e-6 || v) {
      CHECK(bev_overlap(at, bt) == v);
    }
  }
}

TEST_CASE("bev_overlap agrees with Monte-Carlo area sampling")
{
  Rng rng(17);
  int decided = 0;
  for (int pair = 0; pair < 500; ++pair) {
    const Box3D a = random_box(rng, 2.5);
    const Box3D b = random_box(rng, 2.5);
    // sample uniformly over a's footprint and count hits inside b
    const int n = 100000;
    int hits = 0;
    const double c = std::cos(a.yaw);
    const double s = std::sin(a.yaw);
    for (int k = 0; k < n; ++k) {
      const double u = rng.uniform(-a.l / 2, a.l / 2);
      const double v = rng.uniform(-a.w / 2, a.w / 2);
      const Point p{a.cx + c * u - s * v, a.cy + s * u + c * v, b.cz, 0};
      hits += halfspace_inside(b, p) ? 1 : 0;
    }
    const double area = a.l * a.w * hits / n;
    const bool verdict = bev_overlap(a, b);
    if (area > 1e-3) {
      CHECK(verdict);
      ++decided;
    } else if (hits == 0 && polygon_gap(a, b) > 1e-3) {
      CHECK_FALSE(verdict);
      ++decided;
    }
  }
  CHECK(decided > 450);
}
