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

#ifndef SCENEMIX__FIXTURE_HPP_
#define SCENEMIX__FIXTURE_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "scenemix/dataset.hpp"

namespace scenemix
{

/// Categories emitted by the synthetic generator.
inline constexpr const char * kFixtureCategories[] = {"barrier", "bicycle", "car", "pedestrian"};

struct FixtureFrame
{
  SceneFrame frame;
  /// 1 for points sampled from the ground plane, 0 for object surface points.
  std::vector<std::uint8_t> plane_truth;
};

/**
 * One synthetic sweep: a gently tilted plane near z = -1.8 m sampled on
 * concentric rings (constant points per ring, so density falls as 1/range),
 * plus 0-8 non-overlapping boxes whose visible faces are sampled slightly
 * inside the box. Ground hidden under a box footprint is not sampled.
 */
FixtureFrame generate_fixture_frame(std::uint64_t seed, int index);

std::vector<SceneFrame> generate_fixture(std::uint64_t seed, int n_frames);

/// Writes a dataset (manifest, labels, clouds) under dir. Refuses a non-empty
/// dir unless force is set, in which case the dataset files are replaced.
void write_fixture(std::uint64_t seed, int n_frames, const std::filesystem::path & dir, bool force);

}  // namespace scenemix

#endif  // SCENEMIX__FIXTURE_HPP_
