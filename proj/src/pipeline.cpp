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

#include "scenemix/pipeline.hpp"

#include <chrono>
#include <exception>
#include <fstream>
#include <optional>
#include <set>
#include <unordered_map>

#include "scenemix/error.hpp"
#include "scenemix/ground.hpp"
#include "scenemix/schedule.hpp"
#include "text_util.hpp"

namespace scenemix
{

namespace fs = std::filesystem;

namespace
{

void require_manifest(const RunConfig & cfg)
{
  if (cfg.manifest.empty()) {
    throw MissingInputError("no dataset manifest given");
  }
  if (!fs::exists(cfg.manifest)) {
    throw MissingInputError("dataset manifest not found: " + cfg.manifest.string());
  }
}

fs::path labels_path(const RunConfig & cfg)
{
  return cfg.labels.empty() ? cfg.manifest.parent_path() / "labels.csv" : cfg.labels;
}

std::unordered_map<std::string, std::vector<LabeledBox>> load_boxes(const RunConfig & cfg, const std::vector<ManifestRow> & rows)
{
  std::unordered_map<std::string, std::vector<LabeledBox>> boxes;
  for (const ManifestRow & r : rows) {
    boxes[r.frame_id];
  }
  const fs::path lpath = labels_path(cfg);
  if (!fs::exists(lpath)) {
    if (!cfg.labels.empty()) {
      throw MissingInputError("labels file not found: " + lpath.string());
    }
    return boxes;
  }
  for (LabelRow & lr : read_labels(lpath)) {
    const auto it = boxes.find(lr.frame_id);
    if (it == boxes.end()) {
      throw ValidationError(lpath.string() + ": label references unknown frame " + lr.frame_id);
    }
    it->second.push_back(std::move(lr.label));
  }
  return boxes;
}

// Runs fn(i) for every frame index on up to `workers` threads; rethrows the
// first failure in frame order.
template <typename Fn>
void for_each_frame(std::size_t n, int workers, Fn && fn)
{
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto & e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

std::string output_cloud_path(const ManifestRow & row)
{
  const fs::path p(row.cloud_path);
  bool escapes = p.is_absolute();
  for (const auto & part : p) {
    escapes = escapes || part == "..";
  }
  return escapes ? "clouds/" + row.frame_id + ".bin" : row.cloud_path;
}

}  // namespace

GroundLabels frame_mask(const RunConfig & cfg, const PlaceabilityModel * model, const SceneFrame & frame)
{
  if (!cfg.masks.empty()) {
    GroundLabels labels{read_mask(cfg.masks / (frame.frame_id + ".mask"))};
    if (labels.mask.size() != frame.cloud.size()) {
      throw ValidationError("mask for frame " + frame.frame_id + " does not match its cloud");
    }
    return labels;
  }
  if (model != nullptr) {
    return infer_mask(*model, frame.cloud, cfg.composition.placeability_threshold, Execution::serial);
  }
  return ground_fit(frame.cloud, cfg.ground, Execution::serial);
}

AugmentSummary run_augment(const RunConfig & cfg, const ObjectBank & bank, double progress, const fs::path & out_dir)
{
  const auto t0 = std::chrono::steady_clock::now();
  require_manifest(cfg);
  if (!cfg.seed_set) {
    throw ValidationError("augment requires an explicit seed");
  }
  cfg.composition.validate();
  cfg.schedule.validate();
  ScheduleConfig schedule = cfg.schedule;
  schedule.seed = cfg.seed;
  const ScheduleState state = schedule_state(progress, schedule);

  const std::vector<ManifestRow> rows = read_manifest(cfg.manifest);
  const auto boxes = load_boxes(cfg, rows);
  std::optional<PlaceabilityModel> model;
  if (cfg.masks.empty() && !cfg.model.empty()) {
    model = load_model(cfg.model);
  }

  const fs::path root = cfg.manifest.parent_path();
  std::vector<CompositionReport> reports(rows.size());
  std::vector<std::vector<LabeledBox>> out_boxes(rows.size());
  std::vector<ManifestRow> out_rows(rows.size());

  for_each_frame(rows.size(), cfg.workers, [&](std::size_t i) {
    const ManifestRow & row = rows[i];
    SceneFrame frame;
    frame.frame_id = row.frame_id;
    frame.scene_id = row.scene_id;
    frame.cloud = read_cloud(root / row.cloud_path, cfg.fields_per_point);
    frame.boxes = boxes.at(row.frame_id);

    std::set<std::string> present;
    for (const LabeledBox & b : frame.boxes) {
      present.insert(b.category);
    }
    const auto counts = counts_for_frame(present, state, schedule, frame.frame_id);
    const GroundLabels mask = frame_mask(cfg, model ? &*model : nullptr, frame);
    Rng rng(derive_seed(cfg.seed, frame.frame_id, "compose"));
    CompositionOutput out = compose_frame(frame, bank, counts, mask, cfg.composition, rng);

    out_rows[i] = {row.frame_id, row.scene_id, output_cloud_path(row)};
    write_cloud(out.frame.cloud, out_dir / out_rows[i].cloud_path);
    out_boxes[i] = std::move(out.frame.boxes);
    reports[i] = out.report;
  });

  std::vector<LabelRow> labels;
  AugmentSummary summary;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (LabeledBox & b : out_boxes[i]) {
      labels.push_back({rows[i].frame_id, std::move(b)});
    }
    summary.placed += reports[i].placed;
    summary.requested += reports[i].requested;
  }
  write_manifest(out_rows, out_dir / "manifest.csv");
  write_labels(labels, out_dir / "labels.csv");
  write_report(reports, out_dir / "report.csv");
  {
    RunConfig snapshot = cfg;
    const fs::path cpath = out_dir / "config.txt";
    auto out = detail::open_output(cpath);
    out << "# resolved configuration; progress=" << detail::exact(progress) << '\n' << to_text(snapshot);
    detail::finish_output(out, cpath);
  }
  summary.reports = std::move(reports);
  summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return summary;
}

std::size_t run_ground_fit(const RunConfig & cfg, const fs::path & out_dir)
{
  require_manifest(cfg);
  const std::vector<ManifestRow> rows = read_manifest(cfg.manifest);
  const fs::path root = cfg.manifest.parent_path();
  for_each_frame(rows.size(), cfg.workers, [&](std::size_t i) {
    const PointCloud cloud = read_cloud(root / rows[i].cloud_path, cfg.fields_per_point);
    write_mask(ground_fit(cloud, cfg.ground, Execution::serial).mask, out_dir / (rows[i].frame_id + ".mask"));
  });
  return rows.size();
}

std::size_t run_infer(const RunConfig & cfg, const PlaceabilityModel & model, const fs::path & out_dir)
{
  require_manifest(cfg);
  const std::vector<ManifestRow> rows = read_manifest(cfg.manifest);
  const fs::path root = cfg.manifest.parent_path();
  for_each_frame(rows.size(), cfg.workers, [&](std::size_t i) {
    const PointCloud cloud = read_cloud(root / rows[i].cloud_path, cfg.fields_per_point);
    const GroundLabels mask = infer_mask(model, cloud, cfg.composition.placeability_threshold, Execution::serial);
    write_mask(mask.mask, out_dir / (rows[i].frame_id + ".mask"));
  });
  return rows.size();
}

TrainResult run_train(const RunConfig & cfg)
{
  require_manifest(cfg);
  const std::vector<ManifestRow> rows = read_manifest(cfg.manifest);
  if (rows.empty()) {
    throw ValidationError("training needs at least one frame");
  }
  const fs::path root = cfg.manifest.parent_path();
  std::vector<LabeledCloud> data(rows.size());
  for_each_frame(rows.size(), cfg.workers, [&](std::size_t i) {
    LabeledCloud & lc = data[i];
    lc.cloud = read_cloud(root / rows[i].cloud_path, cfg.fields_per_point);
    if (!cfg.masks.empty()) {
      lc.labels = read_mask(cfg.masks / (rows[i].frame_id + ".mask"));
      if (lc.labels.size() != lc.cloud.size()) {
        throw ValidationError("mask for frame " + rows[i].frame_id + " does not match its cloud");
      }
    } else {
      lc.labels = ground_fit(lc.cloud, cfg.ground, Execution::serial).mask;
    }
  });
  const std::size_t hidden[] = {kDefaultHiddenWidth, kDefaultHiddenWidth, kDefaultHiddenWidth};
  PlaceabilityModel model = PlaceabilityModel::random(cfg.fourier_order, hidden, cfg.seed);
  return train(std::move(model), data, cfg.train);
}

}  // namespace scenemix
