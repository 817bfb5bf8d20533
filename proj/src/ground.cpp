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

#include "scenemix/ground.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "scenemix/error.hpp"

namespace scenemix
{

Plane fit_plane(std::span<const Point> cloud, std::span<const std::size_t> idx)
{
  if (idx.empty()) {
    return {};
  }
  const auto n = static_cast<double>(idx.size());
  double mx = 0.0, my = 0.0, mz = 0.0;
  for (const std::size_t i : idx) {
    mx += cloud[i].x;
    my += cloud[i].y;
    mz += cloud[i].z;
  }
  mx /= n;
  my /= n;
  mz /= n;

  Eigen::Matrix2d ata = Eigen::Matrix2d::Zero();
  Eigen::Vector2d atb = Eigen::Vector2d::Zero();
  for (const std::size_t i : idx) {
    const double dx = cloud[i].x - mx;
    const double dy = cloud[i].y - my;
    const double dz = cloud[i].z - mz;
    ata(0, 0) += dx * dx;
    ata(0, 1) += dx * dy;
    ata(1, 1) += dy * dy;
    atb(0) += dx * dz;
    atb(1) += dy * dz;
  }
  ata(1, 0) = ata(0, 1);

  Plane plane{0.0, 0.0, mz};
  const double trace = ata.trace();
  if (idx.size() >= 3 && trace > 0.0 && std::abs(ata.determinant()) > 1e-9 * trace * trace) {
    const Eigen::Vector2d ab = ata.ldlt().solve(atb);
    plane.a = ab(0);
    plane.b = ab(1);
    plane.c = mz - plane.a * mx - plane.b * my;
  }
  return plane;
}

int ground_cell(const GroundFitConfig & cfg, double x, double y)
{
  const double range = std::hypot(x, y);
  const auto ring = std::upper_bound(cfg.ring_edges.begin(), cfg.ring_edges.end(), range);
  if (ring == cfg.ring_edges.end()) {
    return -1;
  }
  const double az = wrap_angle(std::atan2(y, x)) + std::numbers::pi;
  auto sector = static_cast<int>(az / (2.0 * std::numbers::pi) * cfg.sectors);
  sector = std::clamp(sector, 0, cfg.sectors - 1);
  return static_cast<int>(ring - cfg.ring_edges.begin()) * cfg.sectors + sector;
}

namespace
{

std::optional<Plane> fit_cell(std::span<const Point> cloud, std::vector<std::size_t> idx, const GroundFitConfig & cfg)
{
  if (idx.size() < static_cast<std::size_t>(cfg.min_cell_points)) {
    return std::nullopt;
  }
  // lowest-z seeds, ties broken by index for a deterministic selection
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return cloud[a].z < cloud[b].z || (cloud[a].z == cloud[b].z && a < b);
  });
  const auto n_seed = std::max<std::size_t>(
    3, static_cast<std::size_t>(std::ceil(cfg.seed_fraction * static_cast<double>(idx.size()))));
  Plane plane = fit_plane(cloud, std::span(idx).first(std::min(n_seed, idx.size())));

  std::vector<std::size_t> inliers;
  for (int it = 0; it < cfg.iterations; ++it) {
    inliers.clear();
    for (const std::size_t i : idx) {
      if (std::abs(cloud[i].z - plane.height(cloud[i].x, cloud[i].y)) <= cfg.epsilon) {
        inliers.push_back(i);
      }
    }
    if (inliers.size() < 3) {
      break;
    }
    plane = fit_plane(cloud, inliers);
  }
  return plane;
}

}  // namespace

GroundLabels ground_fit(std::span<const Point> cloud, const GroundFitConfig & cfg, Execution exec)
{
  if (cfg.ring_edges.empty() || cfg.sectors < 1 || !std::is_sorted(cfg.ring_edges.begin(), cfg.ring_edges.end())) {
    throw ValidationError("ground fit needs sorted ring edges and at least one sector");
  }
  const int rings = static_cast<int>(cfg.ring_edges.size());
  const int n_cells = rings * cfg.sectors;

  std::vector<int> cell_of(cloud.size());
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(n_cells));
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    cell_of[i] = ground_cell(cfg, cloud[i].x, cloud[i].y);
    if (cell_of[i] >= 0) {
      members[static_cast<std::size_t>(cell_of[i])].push_back(i);
    }
  }

  std::vector<std::optional<Plane>> fitted(static_cast<std::size_t>(n_cells));
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int c = 0; c < n_cells; ++c) {
      fitted[static_cast<std::size_t>(c)] = fit_cell(cloud, members[static_cast<std::size_t>(c)], cfg);
    }
  } else {
    for (int c = 0; c < n_cells; ++c) {
      fitted[static_cast<std::size_t>(c)] = fit_cell(cloud, members[static_cast<std::size_t>(c)], cfg);
    }
  }

  // sparse cells borrow the nearest fitted plane along their sector, inner ring first
  std::vector<std::optional<Plane>> planes = fitted;
  for (int ring = 0; ring < rings; ++ring) {
    for (int s = 0; s < cfg.sectors; ++s) {
      auto & slot = planes[static_cast<std::size_t>(ring * cfg.sectors + s)];
      if (slot) {
        continue;
      }
      for (int d = 1; d < rings && !slot; ++d) {
        for (const int other : {ring - d, ring + d}) {
          if (other >= 0 && other < rings && fitted[static_cast<std::size_t>(other * cfg.sectors + s)]) {
            slot = fitted[static_cast<std::size_t>(other * cfg.sectors + s)];
            break;
          }
        }
      }
    }
  }

  GroundLabels labels;
  labels.mask.assign(cloud.size(), 0);
  const auto n = static_cast<std::ptrdiff_t>(cloud.size());
  auto label_point = [&](std::ptrdiff_t k) {
    const auto i = static_cast<std::size_t>(k);
    if (cell_of[i] < 0) {
      return;
    }
    const auto & plane = planes[static_cast<std::size_t>(cell_of[i])];
    if (plane && std::abs(cloud[i].z - plane->height(cloud[i].x, cloud[i].y)) <= cfg.epsilon) {
      labels.mask[i] = 1;
    }
  };
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      label_point(k);
    }
  } else {
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      label_point(k);
    }
  }
  return labels;
}

}  // namespace scenemix
