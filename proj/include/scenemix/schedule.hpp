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

#ifndef SCENEMIX__SCHEDULE_HPP_
#define SCENEMIX__SCHEDULE_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "scenemix/rng.hpp"

namespace scenemix
{

/// Per-category insertion magnitudes of the common class-balanced sampling recipe.
std::map<std::string, int> reference_magnitudes();

struct ScheduleConfig
{
  std::map<std::string, int> n_plain{reference_magnitudes()};
  double alpha_start{0.75};
  std::vector<double> beta_steps{0.75, 0.85};
  double beta_factor{2.0};
  std::uint64_t seed{0};

  /// Throws ValidationError when the invariants do not hold.
  void validate() const;
};

struct ScheduleState
{
  double t{0.0};
  double alpha{1.0};
  double beta{1.0};
};

/// 1 before alpha_start, then a linear ramp reaching 0 at t = 1.
double alpha_at(double t, const ScheduleConfig & cfg);

/// beta_factor^-k where k counts the beta steps already reached.
double beta_at(double t, const ScheduleConfig & cfg);

ScheduleState schedule_state(double t, const ScheduleConfig & cfg);

/// Expected (fractional) insertion count for one category.
double expected_count(int n_plain, bool present_in_scene, const ScheduleState & state);

/**
 * Integer insertion counts for every category in cfg.n_plain. Categories
 * absent from the scene only receive the plain share; the fractional part is
 * resolved by an unbiased coin flip drawn from rng, in category order.
 */
std::map<std::string, int> counts_for_frame(
  const std::set<std::string> & scene_categories, const ScheduleState & state, const ScheduleConfig & cfg,
  Rng & rng);

/// Same as above with the generator derived from (cfg.seed, frame_id).
std::map<std::string, int> counts_for_frame(
  const std::set<std::string> & scene_categories, const ScheduleState & state, const ScheduleConfig & cfg,
  const std::string & frame_id);

}  // namespace scenemix

#endif  // SCENEMIX__SCHEDULE_HPP_
