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

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <vector>

#include "scenemix/analytics.hpp"
#include "scenemix/error.hpp"
#include "scenemix/fixture.hpp"

using namespace scenemix;

namespace
{

// Voxelize, then coarsen voxel indices onto BEV cells; fg wins within a cell.
CellCounts recount_cells(const SceneFrame & f, const VoxelSpec & s, const std::string & category)
{
  std::map<std::tuple<long, long, long>, bool> voxels;
  for (const Point & p : f.cloud) {
    if (p.x < s.x_min || p.x >= s.x_max || p.y < s.y_min || p.y >= s.y_max || p.z < s.z_min || p.z >= s.z_max) {
      continue;
    }
    const auto key = std::make_tuple(
      static_cast<long>(std::floor((p.x - s.x_min) / s.vx)), static_cast<long>(std::floor((p.y - s.y_min) / s.vy)),
      static_cast<long>(std::floor((p.z - s.z_min) / s.vz)));
    bool fg = false;
    for (const LabeledBox & b : f.boxes) {
      if (b.category == category && !points_in_box(std::span(&p, 1), b.box).empty()) {
        fg = true;
      }
    }
    voxels[key] = voxels[key] || fg;
  }
  std::map<std::pair<long, long>, bool> cells;
  for (const auto & [key, fg] : voxels) {
    const auto cell = std::make_pair(std::get<0>(key) / s.stride, std::get<1>(key) / s.stride);
    cells[cell] = cells[cell] || fg;
  }
  CellCounts c;
  for (const auto & [cell, fg] : cells) {
    (fg ? c.foreground : c.background)++;
  }
  return c;
}

}  // namespace

TEST_CASE("reality_score")
{
  CHECK(reality_score({0.5, 0.5}) == 1.0);
  CHECK(std::abs(reality_score({0.372, 0.5}) - 0.744) < 5e-7);
  CHECK(std::abs(reality_score({0.4665, 0.5}) - 0.933) < 5e-7);
  CHECK(reality_score({0.0, 0.7}) == 0.0);
  CHECK_THROWS_AS(reality_score({0.5, 0.0}), ValidationError);
  CHECK_THROWS_AS(reality_score({-0.1, 0.5}), ValidationError);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double a = rng.uniform(0, 1);
    const double b = rng.uniform(0.01, 1);
    const double k = rng.uniform(0.1, 10);
    CHECK(std::abs(reality_score({k * a, k * b}) - reality_score({a, b})) < 1e-12);
  }
}

TEST_CASE("fg_bg_ratio direct counts")
{
  VoxelSpec spec;
  spec.vx = spec.vy = spec.vz = 1.0;
  spec.stride = 1;
  spec.x_min = spec.y_min = 0.0;
  spec.x_max = spec.y_max = 100.0;
  SceneFrame f;
  f.frame_id = "f";
  for (int i = 0; i < 100; ++i) {
    f.cloud.push_back({i + 0.5, 50.5, 0.5, 0});
  }
  f.boxes.push_back({{0.5, 50.5, 0.5, 0.8, 0.8, 0.8, 0}, "car"});
  const CellCounts c = fg_bg_cells(f, spec, "car");
  CHECK(c.foreground == 1);
  CHECK(c.background == 99);
  CHECK(fg_bg_ratio(std::span(&f, 1), spec, "car") == 1.0 / 99.0);
  CHECK(fg_bg_ratio(std::span(&f, 1), spec, "pedestrian") == 0.0);

  SceneFrame only_fg = f;
  only_fg.cloud.resize(1);
  CHECK_THROWS_AS(fg_bg_ratio(std::span(&only_fg, 1), spec, "car"), ValidationError);
  CHECK_THROWS_AS(fg_bg_ratio({}, spec, "car"), ValidationError);
}

TEST_CASE("fg_bg_cells matches a per-point recount on fixture frames")
{
  const VoxelSpec spec;
  std::vector<SceneFrame> frames;
  for (int i = 0; i < 4; ++i) {
    frames.push_back(generate_fixture_frame(5, i).frame);
  }
  for (const SceneFrame & f : frames) {
    for (const char * cat : kFixtureCategories) {
      const CellCounts got = fg_bg_cells(f, spec, cat);
      const CellCounts want = recount_cells(f, spec, cat);
      CHECK(got.foreground == want.foreground);
      CHECK(got.background == want.background);
    }
  }
  CHECK(fg_bg_ratio(frames, spec, "car", Execution::serial) == fg_bg_ratio(frames, spec, "car", Execution::parallel));
}

TEST_CASE("object_stats arithmetic")
{
  ObjectSample s;
  s.sample_id = "a";
  s.category = "car";
  s.box = {10, 0, 0, 4, 2, 2, 0};
  s.points.resize(160);
  const ObjectBank bank({s});
  VoxelSpec spec;
  spec.vx = spec.vy = spec.vz = 0.1;
  SceneFrame f;
  f.boxes.push_back({s.box, "car"});
  const CategoryStats st = object_stats(std::span(&f, 1), bank, spec);
  const CategoryRow & r = st.at("car");
  CHECK(std::abs(r.mean_voxels - 16000.0) < 1e-6);
  CHECK(std::abs(r.d_pts - 0.01) < 1e-15);
  CHECK(r.r_frame == 1.0);
  CHECK(r.r_obj == 1.0);
  CHECK_THROWS_AS(object_stats(std::span(&f, 1), ObjectBank{}, spec), ValidationError);
}

TEST_CASE("object_stats matches a recount on the fixture")
{
  std::vector<SceneFrame> frames;
  for (int i = 0; i < 12; ++i) {
    frames.push_back(generate_fixture_frame(6, i).frame);
  }
  const auto built = bank_build(frames);
  const VoxelSpec spec;
  const CategoryStats st = object_stats(frames, built.bank, spec);

  double r_obj_sum = 0.0;
  for (const auto & [cat, row] : st) {
    double l = 0, w = 0, h = 0, pts = 0;
    std::size_t n = 0;
    for (const ObjectSample & s : built.bank.samples()) {
      if (s.category == cat) {
        l += s.box.l;
        w += s.box.w;
        h += s.box.h;
        pts += static_cast<double>(points_in_box(s.points, s.box).size());
        ++n;
      }
    }
    std::size_t with = 0;
    for (const SceneFrame & f : frames) {
      bool has = false;
      for (const LabeledBox & b : f.boxes) {
        has = has || b.category == cat;
      }
      with += has ? 1 : 0;
    }
    const double dn = static_cast<double>(n);
    CHECK(row.objects == n);
    CHECK(row.mean_l == doctest::Approx(l / dn).epsilon(1e-12));
    CHECK(row.mean_w == doctest::Approx(w / dn).epsilon(1e-12));
    CHECK(row.mean_h == doctest::Approx(h / dn).epsilon(1e-12));
    CHECK(row.mean_points == doctest::Approx(pts / dn).epsilon(1e-12));
    const double voxels = (l / dn / spec.vx) * (w / dn / spec.vy) * (h / dn / spec.vz);
    CHECK(row.d_pts == doctest::Approx((pts / dn) / voxels).epsilon(1e-12));
    CHECK(row.r_frame == static_cast<double>(with) / static_cast<double>(frames.size()));
    CHECK(row.r_obj == dn / static_cast<double>(built.bank.size()));
    CHECK(row.d_pts > 0.0);
    r_obj_sum += row.r_obj;
  }
  CHECK(std::abs(r_obj_sum - 1.0) < 1e-9);
}

TEST_CASE("scene_category_table")
{
  CHECK(scene_category_table({}).empty());

  SceneFrame a;
  a.scene_id = "scene-0001";
  for (int i = 0; i < 3; ++i) {
    a.boxes.push_back({{10.0 + 5 * i, 0, 0, 4, 2, 1.5, 0}, "car"});
  }
  SceneFrame b;
  b.scene_id = "scene-0002";
  b.boxes.push_back({{5, 5, 0, 1, 1, 1, 0}, "barrier"});
  SceneFrame empty;
  empty.scene_id = "scene-0003";
  const std::vector<SceneFrame> frames = {a, b, empty};
  const SceneCategoryTable t = scene_category_table(frames);
  CHECK(t.at("scene-0001") == std::map<std::string, std::size_t>{{"barrier", 0}, {"car", 3}});
  CHECK(t.at("scene-0002") == std::map<std::string, std::size_t>{{"barrier", 1}, {"car", 0}});
  CHECK(t.at("scene-0003") == std::map<std::string, std::size_t>{{"barrier", 0}, {"car", 0}});

  std::vector<SceneFrame> fixture;
  for (int i = 0; i < 25; ++i) {
    fixture.push_back(generate_fixture_frame(8, i).frame);
  }
  std::map<std::string, std::map<std::string, std::size_t>> want;
  for (const SceneFrame & f : fixture) {
    for (const LabeledBox & lb : f.boxes) {
      want[f.scene_id][lb.category]++;
    }
  }
  const SceneCategoryTable got = scene_category_table(fixture);
  for (const auto & [scene, row] : got) {
    for (const auto & [cat, n] : row) {
      const auto it = want[scene].find(cat);
      CHECK(n == (it == want[scene].end() ? 0 : it->second));
    }
  }
}

TEST_CASE("table writers")
{
  ObjectSample s;
  s.sample_id = "a";
  s.category = "car";
  s.box = {10, 0, 0, 4, 2, 2, 0};
  s.points.resize(160);
  const ObjectBank bank({s});
  VoxelSpec spec;
  spec.vx = spec.vy = spec.vz = 0.1;
  SceneFrame f;
  f.boxes.push_back({s.box, "car"});
  std::ostringstream csv;
  write_object_stats_csv(object_stats(std::span(&f, 1), bank, spec), csv);
  CHECK(csv.str() ==
        "category,objects,mean_l,mean_w,mean_h,mean_points,d_pts,r_frame,r_obj\n"
        "car,1,4.000000,2.000000,2.000000,160.000000,0.010000,1.000000,1.000000\n");
  std::ostringstream table;
  print_object_stats(object_stats(std::span(&f, 1), bank, spec), table);
  CHECK(table.str().find("car") != std::string::npos);
}
