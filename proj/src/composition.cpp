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

#include "scenemix/composition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "scenemix/error.hpp"
#include "text_util.hpp"

namespace scenemix
{

void CompositionConfig::validate() const
{
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(placeability_threshold) || !unit(min_support_fraction)) {
    throw ValidationError("composition thresholds must lie in [0, 1]");
  }
  if (position_attempts < 1 || object_retries < 1) {
    throw ValidationError("composition.position_attempts and composition.object_retries must be >= 1");
  }
  if (!(support_radius_scale > 0.0) || min_support_points < 0) {
    throw ValidationError("composition support radius must be positive");
  }
  if (delta_policy == DeltaPolicy::fixed && !(fixed_delta >= 0.0)) {
    throw ValidationError("composition.fixed_delta must be >= 0");
  }
}

double range_tolerance(const ObjectSample & sample, const CompositionConfig & cfg)
{
  return cfg.delta_policy == DeltaPolicy::half_length ? 0.5 * sample.box.l : cfg.fixed_delta;
}

double select_heading(const std::string & category, std::span<const LabeledBox> scene_boxes, const ObjectBank & bank)
{
  double sx = 0.0;
  double cx = 0.0;
  bool any = false;
  for (const LabeledBox & b : scene_boxes) {
    if (b.category == category) {
      sx += std::sin(b.box.yaw);
      cx += std::cos(b.box.yaw);
      any = true;
    }
  }
  if (any && std::hypot(sx, cx) >= 1e-9) {
    return wrap_angle(std::atan2(sx, cx));
  }
  const auto it = bank.heading_modes().find(category);
  return it == bank.heading_modes().end() ? 0.0 : it->second;
}

BevPosition candidate_position(const ObjectSample & sample, double theta_new, double r_new, double delta)
{
  if (!(std::abs(r_new - sample.origin_range) <= delta) || r_new < 0.0) {
    throw ValidationError("candidate range violates the range tolerance");
  }
  const double azimuth = wrap_angle(sample.observing_angle - theta_new);
  return {r_new * std::cos(azimuth), r_new * std::sin(azimuth)};
}

namespace
{

constexpr double kRangeInset = 1e-9;

double support_radius(const Box3D & footprint, const CompositionConfig & cfg)
{
  return cfg.support_radius_scale * std::max(footprint.l, footprint.w);
}

// Shared by the brute-force and indexed paths; `candidates` must be ascending.
Support evaluate_support(
  std::span<const Point> cloud, std::span<const std::uint8_t> mask, const Box3D & footprint,
  const CompositionConfig & cfg, std::span<const std::size_t> candidates)
{
  const double radius = support_radius(footprint, cfg);
  const double r2 = radius * radius;
  Support s;
  std::vector<double> inside_z;
  std::vector<double> radius_z;
  for (const std::size_t i : candidates) {
    const double dx = cloud[i].x - footprint.cx;
    const double dy = cloud[i].y - footprint.cy;
    if (dx * dx + dy * dy > r2) {
      continue;
    }
    ++s.neighbors;
    if (mask[i] == 0) {
      continue;
    }
    ++s.placeable;
    radius_z.push_back(cloud[i].z);
    if (footprint_contains(footprint, cloud[i].x, cloud[i].y)) {
      inside_z.push_back(cloud[i].z);
    }
  }
  if (s.neighbors < static_cast<std::size_t>(std::max(cfg.min_support_points, 1))) {
    s.verdict = SupportVerdict::insufficient_points;
    return s;
  }
  const double fraction = static_cast<double>(s.placeable) / static_cast<double>(s.neighbors);
  if (fraction < cfg.min_support_fraction) {
    s.verdict = SupportVerdict::not_placeable;
    return s;
  }
  s.verdict = SupportVerdict::ok;
  s.ground_z = inside_z.empty() ? std::move(radius_z) : std::move(inside_z);
  return s;
}

// Uniform BEV bucket grid over a cloud, for radius queries during composition.
class BevIndex
{
public:
  BevIndex(std::span<const Point> cloud, double cell) : cell_(cell)
  {
    if (cloud.empty()) {
      return;
    }
    double xmin = cloud[0].x, xmax = cloud[0].x, ymin = cloud[0].y, ymax = cloud[0].y;
    for (const Point & p : cloud) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
    x0_ = xmin;
    y0_ = ymin;
    nx_ = static_cast<long>((xmax - xmin) / cell_) + 1;
    ny_ = static_cast<long>((ymax - ymin) / cell_) + 1;
    start_.assign(static_cast<std::size_t>(nx_ * ny_) + 1, 0);
    std::vector<long> cell_of(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      cell_of[i] = cell_index(cloud[i].x, cloud[i].y);
      start_[static_cast<std::size_t>(cell_of[i]) + 1]++;
    }
    std::partial_sum(start_.begin(), start_.end(), start_.begin());
    items_.resize(cloud.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      items_[fill[static_cast<std::size_t>(cell_of[i])]++] = i;
    }
  }

  /// Ascending indices of every point in cells touching the query square.
  void query(double x, double y, double radius, std::vector<std::size_t> & out) const
  {
    out.clear();
    if (items_.empty()) {
      return;
    }
    const long ix0 = std::max(0L, static_cast<long>(std::floor((x - radius - x0_) / cell_)));
    const long ix1 = std::min(nx_ - 1, static_cast<long>(std::floor((x + radius - x0_) / cell_)));
    const long iy0 = std::max(0L, static_cast<long>(std::floor((y - radius - y0_) / cell_)));
    const long iy1 = std::min(ny_ - 1, static_cast<long>(std::floor((y + radius - y0_) / cell_)));
    for (long ix = ix0; ix <= ix1; ++ix) {
      for (long iy = iy0; iy <= iy1; ++iy) {
        const auto c = static_cast<std::size_t>(ix * ny_ + iy);
        out.insert(out.end(), items_.begin() + static_cast<std::ptrdiff_t>(start_[c]),
                   items_.begin() + static_cast<std::ptrdiff_t>(start_[c + 1]));
      }
    }
    std::sort(out.begin(), out.end());
  }

private:
  long cell_index(double x, double y) const
  {
    const long ix = std::clamp(static_cast<long>((x - x0_) / cell_), 0L, nx_ - 1);
    const long iy = std::clamp(static_cast<long>((y - y0_) / cell_), 0L, ny_ - 1);
    return ix * ny_ + iy;
  }

  double cell_;
  double x0_{0.0};
  double y0_{0.0};
  long nx_{0};
  long ny_{0};
  std::vector<std::size_t> start_;
  std::vector<std::size_t> items_;
};

}  // namespace

Support placement_support(
  std::span<const Point> scene_cloud, std::span<const std::uint8_t> ground_mask, const Box3D & footprint,
  const CompositionConfig & cfg)
{
  if (scene_cloud.size() != ground_mask.size()) {
    throw ValidationError("placeability mask does not match the scene cloud");
  }
  std::vector<std::size_t> all(scene_cloud.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return evaluate_support(scene_cloud, ground_mask, footprint, cfg, all);
}

double adjust_height(double box_h, std::span<const double> ground_z)
{
  if (ground_z.empty()) {
    throw ValidationError("adjust_height needs at least one ground point");
  }
  double sum = 0.0;
  for (const double z : ground_z) {
    sum += z;
  }
  return sum / static_cast<double>(ground_z.size()) + 0.5 * box_h;
}

PlacementResult place_object(const ObjectSample & sample, double x, double y, double z, double theta_new)
{
  PlacementResult out;
  out.sample_id = sample.sample_id;
  out.category = sample.category;
  out.new_box = sample.box;
  out.new_box.cx = x;
  out.new_box.cy = y;
  out.new_box.cz = z;
  out.new_box.yaw = wrap_angle(theta_new);

  const double delta = theta_new - sample.box.yaw;
  const double c = std::cos(delta);
  const double s = std::sin(delta);
  out.new_points.reserve(sample.points.size());
  for (const Point & p : sample.points) {
    const double dx = p.x - sample.box.cx;
    const double dy = p.y - sample.box.cy;
    out.new_points.push_back({c * dx - s * dy + x, s * dx + c * dy + y, p.z - sample.box.cz + z, p.r});
  }
  return out;
}

PointCloud remove_occupied_points(std::span<const Point> scene_cloud, const Box3D & box)
{
  PointCloud out;
  out.reserve(scene_cloud.size());
  for (const Point & p : scene_cloud) {
    if (!contains(box, p)) {
      out.push_back(p);
    }
  }
  return out;
}

CompositionOutput compose_frame(
  const SceneFrame & frame, const ObjectBank & bank, const std::map<std::string, int> & counts,
  const GroundLabels & placeability, const CompositionConfig & cfg, Rng & rng)
{
  cfg.validate();
  if (placeability.mask.size() != frame.cloud.size()) {
    throw ValidationError("placeability mask size does not match frame " + frame.frame_id);
  }
  CompositionOutput result;
  CompositionReport & report = result.report;
  report.frame_id = frame.frame_id;

  for (const auto & [category, n] : counts) {
    if (n < 0) {
      throw ValidationError("negative insertion count for " + category);
    }
    report.requested += static_cast<std::size_t>(n);
  }
  if (report.requested == 0) {
    result.frame = frame;
    return result;
  }

  const std::span<const Point> cloud = frame.cloud;
  const BevIndex index(cloud, 1.0);
  std::vector<std::uint8_t> alive(cloud.size(), 1);
  const std::span<const std::uint8_t> gate = placeability.mask;
  std::vector<Box3D> occupied;
  for (const LabeledBox & b : frame.boxes) {
    occupied.push_back(b.box);
  }
  std::vector<std::size_t> candidates;

  for (const auto & [category, n] : counts) {  // std::map: alphabetical
    for (int k = 0; k < n; ++k) {
      if (!bank.has_category(category)) {
        ++report.skipped;
        ++report.missing_category;
        continue;
      }
      bool placed = false;
      for (int draw = 0; draw < cfg.object_retries && !placed; ++draw) {
        const auto pool = bank.category_indices(category);
        const std::size_t sample_index = pool[rng.index(pool.size())];
        const ObjectSample & sample = bank.samples()[sample_index];
        const double theta = select_heading(category, frame.boxes, bank);
        const double delta = range_tolerance(sample, cfg);
        // inset keeps rounding in the draw and in hypot() from crossing the bound
        const double inset = std::min(kRangeInset, 0.5 * delta);
        const double r_lo = std::max(0.0, sample.origin_range - delta + inset);
        const double r_hi = sample.origin_range + delta - inset;

        for (int attempt = 0; attempt < cfg.position_attempts; ++attempt) {
          const double r_new = rng.uniform(r_lo, r_hi);
          if (r_new <= 0.0) {
            ++report.rejected_no_candidate;
            continue;
          }
          const BevPosition pos = candidate_position(sample, theta, r_new, delta);
          Box3D footprint = sample.box;
          footprint.cx = pos.x;
          footprint.cy = pos.y;
          footprint.yaw = wrap_angle(theta);

          index.query(pos.x, pos.y, support_radius(footprint, cfg), candidates);
          std::erase_if(candidates, [&](std::size_t i) { return alive[i] == 0; });
          Support support = evaluate_support(cloud, gate, footprint, cfg, candidates);
          if (support.verdict == SupportVerdict::insufficient_points) {
            ++report.rejected_no_candidate;
            continue;
          }
          if (support.verdict == SupportVerdict::not_placeable) {
            ++report.rejected_placeability;
            continue;
          }
          const bool collides = std::any_of(
            occupied.begin(), occupied.end(), [&](const Box3D & b) { return bev_overlap(footprint, b); });
          if (collides) {
            ++report.rejected_collision;
            continue;
          }

          const double z_new = adjust_height(sample.box.h, support.ground_z);
          InsertionRecord record;
          record.placement = place_object(sample, pos.x, pos.y, z_new, theta);
          record.sample_index = sample_index;
          record.delta = delta;
          record.support_fraction =
            static_cast<double>(support.placeable) / static_cast<double>(support.neighbors);
          record.ground_z = std::move(support.ground_z);
          if (cfg.remove_occupied) {
            const Box3D & nb = record.placement.new_box;
            index.query(nb.cx, nb.cy, 0.5 * std::hypot(nb.l, nb.w) + 1e-6, candidates);
            for (const std::size_t i : candidates) {
              if (alive[i] != 0 && contains(nb, cloud[i])) {
                alive[i] = 0;
              }
            }
          }
          occupied.push_back(record.placement.new_box);
          result.insertions.push_back(std::move(record));
          ++report.placed;
          placed = true;
          break;
        }
      }
      if (!placed) {
        ++report.skipped;
      }
    }
  }

  SceneFrame & out = result.frame;
  out.frame_id = frame.frame_id;
  out.scene_id = frame.scene_id;
  out.boxes = frame.boxes;
  out.cloud.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (alive[i] != 0) {
      out.cloud.push_back(cloud[i]);
    }
  }
  for (const InsertionRecord & rec : result.insertions) {
    out.cloud.insert(out.cloud.end(), rec.placement.new_points.begin(), rec.placement.new_points.end());
    out.boxes.push_back({rec.placement.new_box, rec.placement.category});
  }
  return result;
}

void write_report(std::span<const CompositionReport> reports, const std::filesystem::path & path)
{
  auto out = detail::open_output(path);
  out << "frame_id,requested,placed,skipped,missing_category,rejected_placeability,rejected_collision,"
         "rejected_no_candidate\n";
  for (const CompositionReport & r : reports) {
    out << r.frame_id << ',' << r.requested << ',' << r.placed << ',' << r.skipped << ',' << r.missing_category
        << ',' << r.rejected_placeability << ',' << r.rejected_collision << ',' << r.rejected_no_candidate << '\n';
  }
  detail::finish_output(out, path);
}

}  // namespace scenemix
