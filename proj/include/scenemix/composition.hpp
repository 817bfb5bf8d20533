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

#ifndef SCENEMIX__COMPOSITION_HPP_
#define SCENEMIX__COMPOSITION_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "scenemix/dataset.hpp"
#include "scenemix/geometry.hpp"
#include "scenemix/ground.hpp"
#include "scenemix/rng.hpp"

namespace scenemix
{

enum class DeltaPolicy { half_length, fixed };

struct CompositionConfig
{
  DeltaPolicy delta_policy{DeltaPolicy::half_length};
  double fixed_delta{1.0};  ///< meters, used with DeltaPolicy::fixed
  double placeability_threshold{0.5};
  double support_radius_scale{0.5};  ///< support radius = scale * max(l, w)
  int min_support_points{10};
  double min_support_fraction{0.8};
  int position_attempts{10};  ///< K: range draws per sampled object
  int object_retries{3};      ///< M: object draws per requested insertion
  bool remove_occupied{true};

  void validate() const;
};

/// Range tolerance for a sample: half its length, or the fixed value.
double range_tolerance(const ObjectSample & sample, const CompositionConfig & cfg);

/// Closed-form argmax of sum_c cos(theta - theta_c): the direction of the
/// resultant of the same-category headings. Falls back to the bank's heading
/// mode when there are none or they cancel, and to 0 for unknown categories.
double select_heading(const std::string & category, std::span<const LabeledBox> scene_boxes, const ObjectBank & bank);

struct BevPosition
{
  double x{0.0};
  double y{0.0};
};

/// New BEV position at range r_new that keeps the sample's observing angle
/// under the new heading. Throws ValidationError if r_new violates the range bound.
BevPosition candidate_position(const ObjectSample & sample, double theta_new, double r_new, double delta);

enum class SupportVerdict { ok, insufficient_points, not_placeable };

struct Support
{
  SupportVerdict verdict{SupportVerdict::insufficient_points};
  std::size_t neighbors{0};
  std::size_t placeable{0};
  std::vector<double> ground_z;

  bool ok() const { return verdict == SupportVerdict::ok; }
};

/// Gates a footprint on the placeability of scene points within the support radius
/// and gathers the ground heights under it.
Support placement_support(
  std::span<const Point> scene_cloud, std::span<const std::uint8_t> ground_mask, const Box3D & footprint,
  const CompositionConfig & cfg);

/// New box center height resting the box on the mean ground height.
double adjust_height(double box_h, std::span<const double> ground_z);

struct PlacementResult
{
  std::string sample_id;
  std::string category;
  Box3D new_box;
  PointCloud new_points;
};

/// Rigidly moves the sample's points from its original box pose to the new pose.
PlacementResult place_object(const ObjectSample & sample, double x, double y, double z, double theta_new);

/// Drops scene points inside the box (footprint and vertical extent); survivors keep their order.
PointCloud remove_occupied_points(std::span<const Point> scene_cloud, const Box3D & box);

struct CompositionReport
{
  std::string frame_id;
  std::size_t requested{0};
  std::size_t placed{0};
  std::size_t skipped{0};
  std::size_t missing_category{0};  ///< skips caused by categories absent from the bank
  std::size_t rejected_placeability{0};
  std::size_t rejected_collision{0};
  std::size_t rejected_no_candidate{0};
};

/// Everything needed to re-check one accepted insertion.
struct InsertionRecord
{
  PlacementResult placement;
  std::size_t sample_index{0};  ///< position in bank.samples()
  double delta{0.0};
  std::vector<double> ground_z;
  double support_fraction{0.0};
};

struct CompositionOutput
{
  SceneFrame frame;
  CompositionReport report;
  std::vector<InsertionRecord> insertions;
};

/**
 * Inserts bank objects into one frame. Categories are processed in
 * alphabetical order; each insertion draws a sample, picks its heading, then
 * tries up to K ranges, gating on support placeability and BEV overlap with
 * every existing and already placed box. After K misses the object is redrawn,
 * up to M draws in total, before the insertion is skipped.
 */
CompositionOutput compose_frame(
  const SceneFrame & frame, const ObjectBank & bank, const std::map<std::string, int> & counts,
  const GroundLabels & placeability, const CompositionConfig & cfg, Rng & rng);

/// Report CSV: header plus one row per frame.
void write_report(std::span<const CompositionReport> reports, const std::filesystem::path & path);

}  // namespace scenemix

#endif  // SCENEMIX__COMPOSITION_HPP_
