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

#ifndef SCENEMIX__DATASET_HPP_
#define SCENEMIX__DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "scenemix/geometry.hpp"
#include "scenemix/rng.hpp"

namespace scenemix
{

struct LabeledBox
{
  Box3D box;
  std::string category;

  friend bool operator==(const LabeledBox &, const LabeledBox &) = default;
};

struct LabelRow
{
  std::string frame_id;
  LabeledBox label;
};

struct SceneFrame
{
  std::string frame_id;
  std::string scene_id;
  PointCloud cloud;
  std::vector<LabeledBox> boxes;
};

struct ManifestRow
{
  std::string frame_id;
  std::string scene_id;
  std::string cloud_path;
};

struct ObjectSample
{
  std::string sample_id;
  std::string category;
  Box3D box;
  PointCloud points;
  double origin_range{0.0};
  double origin_azimuth{0.0};
  double observing_angle{0.0};
};

class ObjectBank
{
public:
  ObjectBank() = default;
  /// Builds the per-category index and heading modes from the samples.
  explicit ObjectBank(std::vector<ObjectSample> samples);

  const std::vector<ObjectSample> & samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  bool has_category(const std::string & category) const { return index_.contains(category); }
  /// Sample positions (into samples()) for a category; empty if unknown.
  std::span<const std::size_t> category_indices(const std::string & category) const;
  const std::map<std::string, std::vector<std::size_t>> & index() const { return index_; }

  const std::map<std::string, double> & heading_modes() const { return heading_mode_; }

private:
  std::vector<ObjectSample> samples_;
  std::map<std::string, std::vector<std::size_t>> index_;
  std::map<std::string, double> heading_mode_;
};

struct BankBuildResult
{
  ObjectBank bank;
  std::size_t skipped{0};
};

inline constexpr int kDefaultMinPoints = 5;
inline constexpr double kHeadingBinWidth = 10.0 * std::numbers::pi / 180.0;

/// Center of the most populated 10-degree heading bin; ties go to the smaller angle.
double heading_mode(std::span<const double> yaws);

// --- point clouds -----------------------------------------------------------

/// Little-endian float32 records of 4 or 5 fields. The fifth field is dropped;
/// reflectivity is divided by 255 when any value exceeds 1.
PointCloud read_cloud(const std::filesystem::path & path, int fields_per_point = 4);
void write_cloud(std::span<const Point> cloud, const std::filesystem::path & path);

/// Packs points as 16-byte float32 records.
std::vector<char> encode_points(std::span<const Point> cloud);
PointCloud decode_points(std::span<const char> bytes, int fields_per_point = 4);

// --- labels and manifests ---------------------------------------------------

std::vector<LabelRow> read_labels(const std::filesystem::path & path);
void write_labels(std::span<const LabelRow> rows, const std::filesystem::path & path);

std::vector<ManifestRow> read_manifest(const std::filesystem::path & path);
void write_manifest(std::span<const ManifestRow> rows, const std::filesystem::path & path);

/// Per-point boolean masks, one byte per point.
std::vector<std::uint8_t> read_mask(const std::filesystem::path & path);
void write_mask(std::span<const std::uint8_t> mask, const std::filesystem::path & path);

// --- datasets ----------------------------------------------------------------

/// Loads every frame of a dataset manifest. Labels default to `labels.csv`
/// beside the manifest; cloud paths are resolved relative to the manifest.
std::vector<SceneFrame> load_dataset(
  const std::filesystem::path & manifest_path, const std::filesystem::path & labels_path = {},
  int fields_per_point = 4);

/// Writes `manifest.csv`, `labels.csv` and `clouds/<frame_id>.bin` under dir.
void save_dataset(std::span<const SceneFrame> frames, const std::filesystem::path & dir);

// --- object bank -------------------------------------------------------------

BankBuildResult bank_build(std::span<const SceneFrame> frames, int min_points = kDefaultMinPoints);

const ObjectSample & bank_sample(const ObjectBank & bank, const std::string & category, Rng & rng);

/// Persists the bank as `manifest.csv` + `points.blob` under dir.
void save_bank(const ObjectBank & bank, const std::filesystem::path & dir);
ObjectBank load_bank(const std::filesystem::path & dir);

}  // namespace scenemix

#endif  // SCENEMIX__DATASET_HPP_
