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

#include "scenemix/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <string>

#include "scenemix/error.hpp"
#include "scenemix/rng.hpp"

namespace scenemix
{

namespace
{

constexpr double kPi = std::numbers::pi;
constexpr double kGroundHeight = -1.8;
constexpr double kMaxSlopeDeg = 2.0;
constexpr double kFirstRing = 3.0;
constexpr double kRingSpacing = 1.5;
constexpr int kRings = 32;
constexpr int kPointsPerRing = 940;
constexpr double kSurfaceInset = 0.03;

struct Template
{
  const char * category;
  double l, w, h;
  double weight;
  bool follows_road;
};

constexpr Template kTemplates[] = {
  {"car", 4.6, 1.95, 1.73, 0.45, true},
  {"pedestrian", 0.73, 0.67, 1.77, 0.25, false},
  {"bicycle", 1.7, 0.6, 1.29, 0.10, true},
  {"barrier", 0.5, 2.5, 0.98, 0.20, true},
};

std::string frame_name(int index)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06d", index);
  return buf;
}

std::string scene_name(int index)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene-%04d", index / 10);
  return buf;
}

// Label files carry 6 decimals; keep the in-memory boxes identical to what is read back.
double label_precision(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return std::strtod(buf, nullptr);
}

Box3D quantize_box(const Box3D & b)
{
  return {label_precision(b.cx), label_precision(b.cy), label_precision(b.cz), label_precision(b.l),
          label_precision(b.w),  label_precision(b.h),  label_precision(b.yaw)};
}

const Template & pick_template(Rng & rng)
{
  double u = rng.uniform();
  for (const Template & t : kTemplates) {
    if (u < t.weight) {
      return t;
    }
    u -= t.weight;
  }
  return kTemplates[0];
}

// Points on the side faces and the top of the box, inset so that float32
// storage keeps them inside.
void sample_surface(const Box3D & box, int n, Rng & rng, PointCloud & out)
{
  const double hl = 0.5 * box.l - kSurfaceInset;
  const double hw = 0.5 * box.w - kSurfaceInset;
  const double hh = 0.5 * box.h - kSurfaceInset;
  const double side_l = box.l * box.h;
  const double side_w = box.w * box.h;
  const double top = box.l * box.w;
  const double total = 2.0 * side_l + 2.0 * side_w + top;
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  for (int k = 0; k < n; ++k) {
    double u = 0.0, v = 0.0, z = 0.0;
    const double pick = rng.uniform() * total;
    if (pick < 2.0 * side_l) {
      u = rng.uniform(-hl, hl);
      v = pick < side_l ? hw : -hw;
      z = rng.uniform(-hh, hh);
    } else if (pick < 2.0 * side_l + 2.0 * side_w) {
      u = pick < 2.0 * side_l + side_w ? hl : -hl;
      v = rng.uniform(-hw, hw);
      z = rng.uniform(-hh, hh);
    } else {
      u = rng.uniform(-hl, hl);
      v = rng.uniform(-hw, hw);
      z = hh;
    }
    out.push_back({box.cx + c * u - s * v, box.cy + s * u + c * v, box.cz + z, rng.uniform(0.35, 0.9)});
  }
}

}  // namespace

FixtureFrame generate_fixture_frame(std::uint64_t seed, int index)
{
  FixtureFrame result;
  SceneFrame & frame = result.frame;
  frame.frame_id = frame_name(index);
  frame.scene_id = scene_name(index);
  Rng rng(derive_seed(seed, frame.frame_id, "fixture"));

  const double slope = std::tan(rng.uniform(0.0, kMaxSlopeDeg) * kPi / 180.0);
  const double slope_dir = rng.uniform(-kPi, kPi);
  const double gx = slope * std::cos(slope_dir);
  const double gy = slope * std::sin(slope_dir);
  auto ground_z = [&](double x, double y) { return kGroundHeight + gx * x + gy * y; };
  const double road = rng.uniform(-kPi, kPi);

  const auto n_boxes = static_cast<int>(rng.index(9));
  for (int b = 0; b < n_boxes; ++b) {
    const Template & t = pick_template(rng);
    for (int attempt = 0; attempt < 50; ++attempt) {
      const double scale = rng.uniform(0.9, 1.1);
      const double range = rng.uniform(6.0, 40.0);
      const double az = rng.uniform(-kPi, kPi);
      double yaw = t.follows_road ? road + (rng.bernoulli(0.5) ? 0.0 : kPi) + 0.05 * rng.normal()
                                  : rng.uniform(-kPi, kPi);
      yaw = wrap_angle(yaw);
      Box3D box{range * std::cos(az), range * std::sin(az), 0.0, t.l * scale, t.w * scale, t.h * scale, yaw};
      box.cz = ground_z(box.cx, box.cy) + 0.5 * box.h;
      box = quantize_box(box);
      Box3D padded = box;
      padded.l += 0.5;
      padded.w += 0.5;
      const bool clash = std::any_of(frame.boxes.begin(), frame.boxes.end(), [&](const LabeledBox & o) {
        return bev_overlap(padded, o.box);
      });
      if (!clash) {
        frame.boxes.push_back({box, t.category});
        break;
      }
    }
  }

  for (int ring = 0; ring < kRings; ++ring) {
    const double radius = kFirstRing + kRingSpacing * ring;
    const double phase = rng.uniform(0.0, 2.0 * kPi / kPointsPerRing);
    for (int k = 0; k < kPointsPerRing; ++k) {
      const double az = phase + 2.0 * kPi * k / kPointsPerRing;
      const double r = radius + 0.05 * rng.normal();
      const double x = r * std::cos(az);
      const double y = r * std::sin(az);
      const double z = ground_z(x, y) + 0.02 * rng.normal();
      const double refl = rng.uniform(0.02, 0.18);
      const bool hidden = std::any_of(frame.boxes.begin(), frame.boxes.end(), [&](const LabeledBox & o) {
        return footprint_contains(o.box, x, y);
      });
      if (!hidden) {
        frame.cloud.push_back({x, y, z, refl});
        result.plane_truth.push_back(1);
      }
    }
  }

  for (const LabeledBox & lb : frame.boxes) {
    const double range = std::hypot(lb.box.cx, lb.box.cy);
    const double area = (lb.box.l + lb.box.w) * lb.box.h;
    const int n = std::clamp(static_cast<int>(400.0 * area / range), 20, 600);
    sample_surface(lb.box, n, rng, frame.cloud);
    result.plane_truth.resize(frame.cloud.size(), 0);
  }

  // float32 storage precision, so in-memory frames match what is read back
  for (Point & p : frame.cloud) {
    p = {static_cast<float>(p.x), static_cast<float>(p.y), static_cast<float>(p.z), static_cast<float>(p.r)};
  }
  return result;
}

std::vector<SceneFrame> generate_fixture(std::uint64_t seed, int n_frames)
{
  if (n_frames < 1) {
    throw ValidationError("fixture needs at least one frame");
  }
  std::vector<SceneFrame> frames;
  frames.reserve(static_cast<std::size_t>(n_frames));
  for (int i = 0; i < n_frames; ++i) {
    frames.push_back(generate_fixture_frame(seed, i).frame);
  }
  return frames;
}

void write_fixture(std::uint64_t seed, int n_frames, const std::filesystem::path & dir, bool force)
{
  namespace fs = std::filesystem;
  if (n_frames < 1) {
    throw ValidationError("fixture needs at least one frame");
  }
  std::error_code ec;
  if (fs::exists(dir) && !fs::is_empty(dir, ec)) {
    if (!force) {
      throw ValidationError("output directory is not empty (use --force): " + dir.string());
    }
    fs::remove_all(dir / "clouds", ec);
    fs::remove(dir / "manifest.csv", ec);
    fs::remove(dir / "labels.csv", ec);
  }
  const auto frames = generate_fixture(seed, n_frames);
  save_dataset(frames, dir);
}

}  // namespace scenemix
