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

#ifndef SCENEMIX__PIPELINE_HPP_
#define SCENEMIX__PIPELINE_HPP_

#include <filesystem>
#include <vector>

#include "scenemix/composition.hpp"
#include "scenemix/config.hpp"
#include "scenemix/dataset.hpp"
#include "scenemix/placeability.hpp"

namespace scenemix
{

struct AugmentSummary
{
  std::vector<CompositionReport> reports;
  std::size_t placed{0};
  std::size_t requested{0};
  double seconds{0.0};
};

/**
 * Frame-parallel augmentation of the dataset named by cfg.manifest.
 *
 * Each frame gets its own generators derived from (cfg.seed, frame_id), so
 * the written bytes do not depend on cfg.workers. Placeability comes from
 * precomputed masks (cfg.masks), else the model (cfg.model), else the
 * plane-fit labels. Writes manifest.csv, labels.csv, clouds/, report.csv and
 * the resolved config (config.txt) under out_dir.
 */
AugmentSummary run_augment(const RunConfig & cfg, const ObjectBank & bank, double progress, const std::filesystem::path & out_dir);

/// Writes <frame_id>.mask plane-fit labels for every frame; returns the frame count.
std::size_t run_ground_fit(const RunConfig & cfg, const std::filesystem::path & out_dir);

/// Writes <frame_id>.mask model predictions for every frame; returns the frame count.
std::size_t run_infer(const RunConfig & cfg, const PlaceabilityModel & model, const std::filesystem::path & out_dir);

/// Trains on every frame, with labels from cfg.masks when set, else plane fitting.
TrainResult run_train(const RunConfig & cfg);

/// Frame mask according to the configured placeability source.
GroundLabels frame_mask(const RunConfig & cfg, const PlaceabilityModel * model, const SceneFrame & frame);

}  // namespace scenemix

#endif  // SCENEMIX__PIPELINE_HPP_
