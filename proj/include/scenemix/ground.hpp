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

#ifndef SCENEMIX__GROUND_HPP_
#define SCENEMIX__GROUND_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "scenemix/execution.hpp"
#include "scenemix/geometry.hpp"

namespace scenemix
{

/// Per-point placeability labels; 1 = ground / placeable.
struct GroundLabels
{
  std::vector<std::uint8_t> mask;
};

/**
 * Concentric-zone plane fitting. The BEV plane is cut into rings (outer
 * radii in ring_edges) and equal azimuth sectors; each cell gets its own
 * plane z = a*x + b*y + c.
 */
struct GroundFitConfig
{
  std::vector<double> ring_edges{10.0, 20.0, 40.0, 80.0};
  int sectors{16};
  double seed_fraction{0.2};
  double epsilon{0.2};  ///< vertical inlier band, meters
  int iterations{3};
  int min_cell_points{10};
};

struct Plane
{
  double a{0.0};
  double b{0.0};
  double c{0.0};

  double height(double x, double y) const { return a * x + b * y + c; }
};

/// Least-squares z = a*x + b*y + c through the selected points. Falls back to a
/// horizontal plane at the mean height when the xy spread is degenerate.
Plane fit_plane(std::span<const Point> cloud, std::span<const std::size_t> idx);

/// Cell id for (x, y), or -1 beyond the outermost ring.
int ground_cell(const GroundFitConfig & cfg, double x, double y);

GroundLabels ground_fit(
  std::span<const Point> cloud, const GroundFitConfig & cfg = {}, Execution exec = Execution::parallel);

}  // namespace scenemix

#endif  // SCENEMIX__GROUND_HPP_
