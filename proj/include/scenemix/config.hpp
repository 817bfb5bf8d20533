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

#ifndef SCENEMIX__CONFIG_HPP_
#define SCENEMIX__CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "scenemix/analytics.hpp"
#include "scenemix/composition.hpp"
#include "scenemix/ground.hpp"
#include "scenemix/placeability.hpp"
#include "scenemix/schedule.hpp"

namespace scenemix
{

/**
 * Flat `key=value` document with dotted section keys, e.g.
 *
 *     # comment
 *     seed=7
 *     schedule.alpha_start=0.75
 *     schedule.beta_steps=0.75,0.85
 *     schedule.n_plain.car=2
 *
 * Later assignments win, so command-line overrides are applied with set().
 */
class KeyValueConfig
{
public:
  static KeyValueConfig parse(const std::string & text, const std::string & origin = "<config>");
  static KeyValueConfig load(const std::filesystem::path & path);

  void set(const std::string & key, const std::string & value) { values_[key] = value; }
  /// Parses "key=value"; throws ValidationError when there is no '='.
  void set_assignment(const std::string & assignment);
  bool has(const std::string & key) const { return values_.contains(key); }
  const std::map<std::string, std::string> & values() const { return values_; }

private:
  std::map<std::string, std::string> values_;
};

struct RunConfig
{
  std::filesystem::path manifest;
  std::filesystem::path labels;
  int fields_per_point{4};
  std::filesystem::path bank;
  std::filesystem::path model;
  std::filesystem::path masks;
  int bank_min_points{kDefaultMinPoints};
  std::uint64_t seed{0};
  bool seed_set{false};
  int workers{1};

  CompositionConfig composition;
  ScheduleConfig schedule;
  VoxelSpec voxel;
  GroundFitConfig ground;
  TrainConfig train;
  int fourier_order{kDefaultFourierOrder};
};

/// Resolves a key-value document into typed settings. Unknown keys and
/// malformed values raise ValidationError. A document that names any
/// `schedule.n_plain.*` key replaces the default magnitudes entirely.
RunConfig resolve_config(const KeyValueConfig & kv);

/// Fully resolved settings in the same key-value syntax (round-trips through resolve_config).
std::string to_text(const RunConfig & cfg);

}  // namespace scenemix

#endif  // SCENEMIX__CONFIG_HPP_
