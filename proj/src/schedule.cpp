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

#include "scenemix/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "scenemix/error.hpp"

namespace scenemix
{

std::map<std::string, int> reference_magnitudes()
{
  return {
    {"car", 2},     {"truck", 3},      {"construction_vehicle", 7}, {"bus", 4},        {"trailer", 6},
    {"barrier", 2}, {"motorcycle", 6}, {"bicycle", 6},              {"pedestrian", 2}, {"traffic_cone", 2},
  };
}

void ScheduleConfig::validate() const
{
  if (!(alpha_start >= 0.0 && alpha_start <= 1.0)) {
    throw ValidationError("schedule.alpha_start must lie in [0, 1]");
  }
  for (std::size_t i = 0; i < beta_steps.size(); ++i) {
    if (!(beta_steps[i] >= 0.0 && beta_steps[i] <= 1.0)) {
      throw ValidationError("schedule.beta_steps must lie in [0, 1]");
    }
    if (i > 0 && !(beta_steps[i] > beta_steps[i - 1])) {
      throw ValidationError("schedule.beta_steps must be strictly increasing");
    }
  }
  if (!(beta_factor >= 1.0)) {
    throw ValidationError("schedule.beta_factor must be >= 1");
  }
  for (const auto & [category, n] : n_plain) {
    if (n < 0) {
      throw ValidationError("schedule.n_plain." + category + " must be >= 0");
    }
  }
}

namespace
{

void check_progress(double t)
{
  if (!(t >= 0.0 && t <= 1.0)) {
    throw ValidationError("training progress must lie in [0, 1]");
  }
}

}  // namespace

double alpha_at(double t, const ScheduleConfig & cfg)
{
  check_progress(t);
  if (t >= 1.0) {
    return 0.0;
  }
  if (t < cfg.alpha_start) {
    return 1.0;
  }
  return 1.0 - (t - cfg.alpha_start) / (1.0 - cfg.alpha_start);
}

double beta_at(double t, const ScheduleConfig & cfg)
{
  check_progress(t);
  const auto k = std::count_if(cfg.beta_steps.begin(), cfg.beta_steps.end(), [t](double s) { return s <= t; });
  return std::pow(cfg.beta_factor, -static_cast<double>(k));
}

ScheduleState schedule_state(double t, const ScheduleConfig & cfg)
{
  return {t, alpha_at(t, cfg), beta_at(t, cfg)};
}

double expected_count(int n_plain, bool present_in_scene, const ScheduleState & state)
{
  const double plain = static_cast<double>(n_plain);
  const double exist = present_in_scene ? plain : 0.0;
  return (plain * state.alpha + exist * (1.0 - state.alpha)) * state.beta;
}

std::map<std::string, int> counts_for_frame(
  const std::set<std::string> & scene_categories, const ScheduleState & state, const ScheduleConfig & cfg,
  Rng & rng)
{
  std::map<std::string, int> counts;
  for (const auto & [category, n] : cfg.n_plain) {
    const double raw = expected_count(n, scene_categories.contains(category), state);
    const double whole = std::floor(raw);
    const double frac = raw - whole;
    // always draw so the stream position does not depend on the values
    const bool up = rng.bernoulli(frac);
    counts[category] = static_cast<int>(whole) + (up ? 1 : 0);
  }
  return counts;
}

std::map<std::string, int> counts_for_frame(
  const std::set<std::string> & scene_categories, const ScheduleState & state, const ScheduleConfig & cfg,
  const std::string & frame_id)
{
  Rng rng(derive_seed(cfg.seed, frame_id, "counts"));
  return counts_for_frame(scene_categories, state, cfg, rng);
}

}  // namespace scenemix
