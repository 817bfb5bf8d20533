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

#include "scenemix/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "scenemix/error.hpp"
#include "text_util.hpp"

namespace scenemix
{

double reality_score(const MetricPair & m)
{
  if (!(m.map_noaug > 0.0)) {
    throw ValidationError("reality score needs map_noaug > 0");
  }
  if (!(m.map_aug >= 0.0)) {
    throw ValidationError("reality score needs map_aug >= 0");
  }
  return m.map_aug / m.map_noaug;
}

void VoxelSpec::validate() const
{
  if (!(vx > 0.0 && vy > 0.0 && vz > 0.0) || stride < 1) {
    throw ValidationError("voxel sizes must be positive and stride >= 1");
  }
  if (!(x_max > x_min && y_max > y_min && z_max > z_min)) {
    throw ValidationError("voxel bounds must be non-empty");
  }
}

CellCounts fg_bg_cells(const SceneFrame & frame, const VoxelSpec & spec, const std::string & category)
{
  // key -> foreground flag
  std::unordered_map<std::uint64_t, bool> cells;
  std::vector<const Box3D *> boxes;
  for (const LabeledBox & b : frame.boxes) {
    if (b.category == category) {
      boxes.push_back(&b.box);
    }
  }
  for (const Point & p : frame.cloud) {
    if (p.x < spec.x_min || p.x >= spec.x_max || p.y < spec.y_min || p.y >= spec.y_max || p.z < spec.z_min ||
        p.z >= spec.z_max) {
      continue;
    }
    const auto vxi = static_cast<std::uint64_t>(std::floor((p.x - spec.x_min) / spec.vx));
    const auto vyi = static_cast<std::uint64_t>(std::floor((p.y - spec.y_min) / spec.vy));
    const std::uint64_t key = ((vxi / static_cast<std::uint64_t>(spec.stride)) << 32) |
                              (vyi / static_cast<std::uint64_t>(spec.stride));
    const bool fg = std::any_of(boxes.begin(), boxes.end(), [&](const Box3D * b) { return contains(*b, p); });
    auto [it, inserted] = cells.try_emplace(key, fg);
    if (!inserted && fg) {
      it->second = true;
    }
  }
  CellCounts counts;
  for (const auto & [key, fg] : cells) {
    (fg ? counts.foreground : counts.background)++;
  }
  return counts;
}

double fg_bg_ratio(std::span<const SceneFrame> frames, const VoxelSpec & spec, const std::string & category, Execution exec)
{
  spec.validate();
  if (frames.empty()) {
    throw ValidationError("fg/bg ratio needs at least one frame");
  }
  std::vector<CellCounts> per_frame(frames.size());
  const auto n = static_cast<std::ptrdiff_t>(frames.size());
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      per_frame[static_cast<std::size_t>(i)] = fg_bg_cells(frames[static_cast<std::size_t>(i)], spec, category);
    }
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      per_frame[static_cast<std::size_t>(i)] = fg_bg_cells(frames[static_cast<std::size_t>(i)], spec, category);
    }
  }
  // merge in frame order
  double sum = 0.0;
  for (std::size_t i = 0; i < per_frame.size(); ++i) {
    if (per_frame[i].background == 0) {
      throw ValidationError("frame " + frames[i].frame_id + " has no occupied background cells");
    }
    sum += static_cast<double>(per_frame[i].foreground) / static_cast<double>(per_frame[i].background);
  }
  return sum / static_cast<double>(per_frame.size());
}

CategoryStats object_stats(std::span<const SceneFrame> frames, const ObjectBank & bank, const VoxelSpec & spec)
{
  if (bank.empty()) {
    throw ValidationError("object stats need a nonempty bank");
  }
  spec.validate();
  CategoryStats stats;
  for (const auto & [category, idx] : bank.index()) {
    CategoryRow row;
    row.objects = idx.size();
    double pts = 0.0;
    for (const std::size_t i : idx) {
      const ObjectSample & s = bank.samples()[i];
      row.mean_l += s.box.l;
      row.mean_w += s.box.w;
      row.mean_h += s.box.h;
      pts += static_cast<double>(s.points.size());
    }
    const auto n = static_cast<double>(idx.size());
    row.mean_l /= n;
    row.mean_w /= n;
    row.mean_h /= n;
    row.mean_points = pts / n;
    row.mean_voxels = (row.mean_l / spec.vx) * (row.mean_w / spec.vy) * (row.mean_h / spec.vz);
    row.d_pts = row.mean_points / row.mean_voxels;
    row.r_obj = n / static_cast<double>(bank.size());
    std::size_t with = 0;
    for (const SceneFrame & f : frames) {
      const bool has = std::any_of(f.boxes.begin(), f.boxes.end(), [&](const LabeledBox & b) { return b.category == category; });
      with += has ? 1 : 0;
    }
    row.r_frame = frames.empty() ? 0.0 : static_cast<double>(with) / static_cast<double>(frames.size());
    stats.emplace(category, row);
  }
  return stats;
}

SceneCategoryTable scene_category_table(std::span<const SceneFrame> frames)
{
  std::set<std::string> categories;
  for (const SceneFrame & f : frames) {
    for (const LabeledBox & b : f.boxes) {
      categories.insert(b.category);
    }
  }
  SceneCategoryTable table;
  for (const SceneFrame & f : frames) {
    auto & row = table[f.scene_id];
    for (const std::string & c : categories) {
      row.try_emplace(c, 0);
    }
    for (const LabeledBox & b : f.boxes) {
      row[b.category]++;
    }
  }
  return table;
}

void write_object_stats_csv(const CategoryStats & stats, std::ostream & out)
{
  out << "category,objects,mean_l,mean_w,mean_h,mean_points,d_pts,r_frame,r_obj\n";
  for (const auto & [category, r] : stats) {
    out << category << ',' << r.objects << ',' << detail::fixed6(r.mean_l) << ',' << detail::fixed6(r.mean_w)
        << ',' << detail::fixed6(r.mean_h) << ',' << detail::fixed6(r.mean_points) << ','
        << detail::fixed6(r.d_pts) << ',' << detail::fixed6(r.r_frame) << ',' << detail::fixed6(r.r_obj) << '\n';
  }
}

void print_object_stats(const CategoryStats & stats, std::ostream & out)
{
  char line[256];
  std::snprintf(line, sizeof(line), "%-22s %8s %8s %8s %8s %8s %9s %9s\n", "category", "objects", "l", "w", "h",
                "D_pts", "R_frame", "R_obj");
  out << line;
  for (const auto & [category, r] : stats) {
    std::snprintf(line, sizeof(line), "%-22s %8zu %8.3f %8.3f %8.3f %8.3f %8.2f%% %8.2f%%\n", category.c_str(),
                  r.objects, r.mean_l, r.mean_w, r.mean_h, r.d_pts, 100.0 * r.r_frame, 100.0 * r.r_obj);
    out << line;
  }
}

void write_scene_category_csv(const SceneCategoryTable & table, std::ostream & out)
{
  out << "scene_id,category,count\n";
  for (const auto & [scene, row] : table) {
    for (const auto & [category, n] : row) {
      out << scene << ',' << category << ',' << n << '\n';
    }
  }
}

void print_scene_category(const SceneCategoryTable & table, std::ostream & out)
{
  if (table.empty()) {
    return;
  }
  const auto & first = table.begin()->second;
  out << std::left << std::setw(16) << "scene";
  for (const auto & [category, n] : first) {
    out << ' ' << std::right << std::setw(std::max<int>(6, static_cast<int>(category.size()))) << category;
  }
  out << '\n';
  for (const auto & [scene, row] : table) {
    out << std::left << std::setw(16) << scene;
    for (const auto & [category, n] : row) {
      out << ' ' << std::right << std::setw(std::max<int>(6, static_cast<int>(category.size()))) << n;
    }
    out << '\n';
  }
}

}  // namespace scenemix
