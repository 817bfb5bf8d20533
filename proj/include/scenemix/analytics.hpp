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

#ifndef SCENEMIX__ANALYTICS_HPP_
#define SCENEMIX__ANALYTICS_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "scenemix/dataset.hpp"
#include "scenemix/execution.hpp"

namespace scenemix
{

struct MetricPair
{
  double map_aug{0.0};
  double map_noaug{1.0};
};

/// Ratio of a fixed model's metric on augmented versus real validation data.
double reality_score(const MetricPair & m);

struct VoxelSpec
{
  double vx{0.075};
  double vy{0.075};
  double vz{0.2};
  int stride{8};
  double x_min{-54.0};
  double x_max{54.0};
  double y_min{-54.0};
  double y_max{54.0};
  double z_min{-5.0};
  double z_max{3.0};

  void validate() const;
};

/// Occupied BEV feature-map cells of one frame for one category.
struct CellCounts
{
  std::size_t foreground{0};
  std::size_t background{0};
};

/**
 * Points are voxelized at (vx, vy, vz) inside the bounds and their voxels
 * coarsened by `stride` onto a BEV grid with z collapsed. A cell is
 * foreground when it holds a point inside a box of the category, background
 * when it is occupied otherwise.
 */
CellCounts fg_bg_cells(const SceneFrame & frame, const VoxelSpec & spec, const std::string & category);

/// Per-frame (#fg / #bg) averaged over frames. Throws ValidationError when a
/// frame has no occupied background cell.
double fg_bg_ratio(
  std::span<const SceneFrame> frames, const VoxelSpec & spec, const std::string & category,
  Execution exec = Execution::parallel);

struct CategoryRow
{
  std::size_t objects{0};
  double mean_l{0.0};
  double mean_w{0.0};
  double mean_h{0.0};
  double mean_points{0.0};
  double mean_voxels{0.0};
  double d_pts{0.0};    ///< mean points per voxel, from category means
  double r_frame{0.0};  ///< fraction of frames with the category
  double r_obj{0.0};    ///< fraction of bank objects
};

using CategoryStats = std::map<std::string, CategoryRow>;

CategoryStats object_stats(std::span<const SceneFrame> frames, const ObjectBank & bank, const VoxelSpec & spec);

using SceneCategoryTable = std::map<std::string, std::map<std::string, std::size_t>>;

/// scene -> category -> box count. Every scene lists every category seen anywhere.
SceneCategoryTable scene_category_table(std::span<const SceneFrame> frames);

void write_object_stats_csv(const CategoryStats & stats, std::ostream & out);
void print_object_stats(const CategoryStats & stats, std::ostream & out);
void write_scene_category_csv(const SceneCategoryTable & table, std::ostream & out);
void print_scene_category(const SceneCategoryTable & table, std::ostream & out);

}  // namespace scenemix

#endif  // SCENEMIX__ANALYTICS_HPP_
