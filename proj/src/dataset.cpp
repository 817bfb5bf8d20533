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

#include "scenemix/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <unordered_map>

#include "scenemix/error.hpp"
#include "text_util.hpp"

namespace scenemix
{

static_assert(std::endian::native == std::endian::little, "point files are little-endian float32");

namespace
{

constexpr std::string_view kLabelHeader = "frame_id,category,cx,cy,cz,l,w,h,yaw";
constexpr std::string_view kManifestHeader = "frame_id,scene_id,cloud_path";
constexpr std::string_view kBankHeader =
  "sample_id,category,cx,cy,cz,l,w,h,yaw,origin_range,origin_azimuth,observing_angle,num_points,"
  "offset,length";
constexpr std::size_t kRecordBytes = 16;

std::vector<char> slurp(const std::filesystem::path & path)
{
  auto in = detail::open_input(path, true);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw IoError("read failed: " + path.string());
  }
  return bytes;
}

void check_box(const Box3D & b, const std::string & where)
{
  for (const double v : {b.cx, b.cy, b.cz, b.l, b.w, b.h, b.yaw}) {
    if (!std::isfinite(v)) {
      throw ValidationError(where + ": non-finite box field");
    }
  }
  if (b.l <= 0.0 || b.w <= 0.0 || b.h <= 0.0) {
    throw ValidationError(where + ": box extents must be positive");
  }
}

ObjectSample make_sample(std::string id, const LabeledBox & lb, PointCloud points)
{
  ObjectSample s;
  s.sample_id = std::move(id);
  s.category = lb.category;
  s.box = lb.box;
  s.points = std::move(points);
  const PolarPosition polar = to_polar(lb.box.cx, lb.box.cy);
  s.origin_range = polar.range;
  s.origin_azimuth = polar.azimuth;
  s.observing_angle = observing_angle(lb.box);
  return s;
}

}  // namespace

// --- object bank --------------------------------------------------------------

double heading_mode(std::span<const double> yaws)
{
  constexpr int kBins = 36;
  std::array<std::size_t, kBins> hist{};
  for (const double yaw : yaws) {
    auto bin = static_cast<int>(std::floor((wrap_angle(yaw) + std::numbers::pi) / kHeadingBinWidth));
    hist[static_cast<std::size_t>(std::clamp(bin, 0, kBins - 1))]++;
  }
  const auto best = std::max_element(hist.begin(), hist.end());  // first max = smaller angle
  const auto k = static_cast<double>(std::distance(hist.begin(), best));
  return wrap_angle(-std::numbers::pi + (k + 0.5) * kHeadingBinWidth);
}

ObjectBank::ObjectBank(std::vector<ObjectSample> samples) : samples_(std::move(samples))
{
  std::map<std::string, std::vector<double>> yaws;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    index_[samples_[i].category].push_back(i);
    yaws[samples_[i].category].push_back(samples_[i].box.yaw);
  }
  for (const auto & [category, ys] : yaws) {
    heading_mode_[category] = heading_mode(ys);
  }
}

std::span<const std::size_t> ObjectBank::category_indices(const std::string & category) const
{
  const auto it = index_.find(category);
  if (it == index_.end()) {
    return {};
  }
  return it->second;
}

BankBuildResult bank_build(std::span<const SceneFrame> frames, int min_points)
{
  if (min_points < 1) {
    throw ValidationError("bank min_points must be >= 1");
  }
  std::vector<ObjectSample> samples;
  std::size_t skipped = 0;
  for (const SceneFrame & frame : frames) {
    for (std::size_t j = 0; j < frame.boxes.size(); ++j) {
      const LabeledBox & lb = frame.boxes[j];
      const auto idx = points_in_box(frame.cloud, lb.box);
      if (idx.size() < static_cast<std::size_t>(min_points) || (lb.box.cx == 0.0 && lb.box.cy == 0.0)) {
        ++skipped;
        continue;
      }
      PointCloud pts;
      pts.reserve(idx.size());
      for (const std::size_t i : idx) {
        pts.push_back(frame.cloud[i]);
      }
      samples.push_back(make_sample(frame.frame_id + "_" + std::to_string(j), lb, std::move(pts)));
    }
  }
  return {ObjectBank(std::move(samples)), skipped};
}

const ObjectSample & bank_sample(const ObjectBank & bank, const std::string & category, Rng & rng)
{
  const auto idx = bank.category_indices(category);
  if (idx.empty()) {
    throw ValidationError("category not in object bank: " + category);
  }
  return bank.samples()[idx[rng.index(idx.size())]];
}

// --- point clouds -------------------------------------------------------------

PointCloud decode_points(std::span<const char> bytes, int fields_per_point)
{
  const std::size_t stride = 4 * static_cast<std::size_t>(fields_per_point);
  const std::size_t n = bytes.size() / stride;
  PointCloud cloud(n);
  bool rescale = false;
  for (std::size_t i = 0; i < n; ++i) {
    float f[4];
    std::memcpy(f, bytes.data() + i * stride, sizeof(f));
    cloud[i] = {f[0], f[1], f[2], f[3]};
    rescale = rescale || f[3] > 1.0f;
  }
  if (rescale) {
    for (Point & p : cloud) {
      p.r /= 255.0;
    }
  }
  return cloud;
}

PointCloud read_cloud(const std::filesystem::path & path, int fields_per_point)
{
  if (fields_per_point != 4 && fields_per_point != 5) {
    throw ValidationError("fields_per_point must be 4 or 5, got " + std::to_string(fields_per_point));
  }
  const std::vector<char> bytes = slurp(path);
  const std::size_t stride = 4 * static_cast<std::size_t>(fields_per_point);
  if (bytes.size() % stride != 0) {
    throw FormatError(
      path.string() + ": size " + std::to_string(bytes.size()) + " not a multiple of " +
      std::to_string(stride) + " (remainder " + std::to_string(bytes.size() % stride) + " bytes)");
  }
  PointCloud cloud = decode_points(bytes, fields_per_point);
  for (const Point & p : cloud) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) || !std::isfinite(p.r)) {
      throw FormatError(path.string() + ": non-finite point field");
    }
  }
  return cloud;
}

std::vector<char> encode_points(std::span<const Point> cloud)
{
  std::vector<char> bytes(cloud.size() * kRecordBytes);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const float f[4] = {
      static_cast<float>(cloud[i].x), static_cast<float>(cloud[i].y), static_cast<float>(cloud[i].z),
      static_cast<float>(cloud[i].r)};
    std::memcpy(bytes.data() + i * kRecordBytes, f, sizeof(f));
  }
  return bytes;
}

void write_cloud(std::span<const Point> cloud, const std::filesystem::path & path)
{
  const std::vector<char> bytes = encode_points(cloud);
  auto out = detail::open_output(path, true);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  detail::finish_output(out, path);
}

// --- labels -------------------------------------------------------------------

std::vector<LabelRow> read_labels(const std::filesystem::path & path)
{
  auto in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kLabelHeader) {
    throw FormatError(path.string() + ":1: expected header '" + std::string(kLabelHeader) + "'");
  }
  std::vector<LabelRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) {
      continue;
    }
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto cols = detail::split(line);
    if (cols.size() != 9) {
      throw FormatError(where + ": expected 9 columns, got " + std::to_string(cols.size()));
    }
    LabelRow row;
    row.frame_id = std::string(detail::trim(cols[0]));
    row.label.category = std::string(detail::trim(cols[1]));
    if (row.frame_id.empty() || row.label.category.empty()) {
      throw FormatError(where + ": empty frame_id or category");
    }
    double v[7];
    for (int k = 0; k < 7; ++k) {
      if (!detail::parse_double(cols[2 + k], v[k])) {
        throw FormatError(where + ": bad number '" + std::string(cols[2 + k]) + "'");
      }
    }
    row.label.box = {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
    check_box(row.label.box, where);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_labels(std::span<const LabelRow> rows, const std::filesystem::path & path)
{
  auto out = detail::open_output(path);
  out << kLabelHeader << '\n';
  for (const LabelRow & row : rows) {
    const Box3D & b = row.label.box;
    out << row.frame_id << ',' << row.label.category;
    for (const double v : {b.cx, b.cy, b.cz, b.l, b.w, b.h, b.yaw}) {
      out << ',' << detail::fixed6(v);
    }
    out << '\n';
  }
  detail::finish_output(out, path);
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path & path)
{
  auto in = detail::open_input(path);
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kManifestHeader) {
    throw FormatError(path.string() + ":1: expected header '" + std::string(kManifestHeader) + "'");
  }
  std::vector<ManifestRow> rows;
  std::set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) {
      continue;
    }
    const auto cols = detail::split(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (cols.size() != 3) {
      throw FormatError(where + ": expected 3 columns, got " + std::to_string(cols.size()));
    }
    ManifestRow row{
      std::string(detail::trim(cols[0])), std::string(detail::trim(cols[1])),
      std::string(detail::trim(cols[2]))};
    if (row.frame_id.empty() || row.cloud_path.empty()) {
      throw FormatError(where + ": empty frame_id or cloud_path");
    }
    if (!seen.insert(row.frame_id).second) {
      throw ValidationError(where + ": duplicate frame_id " + row.frame_id);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_manifest(std::span<const ManifestRow> rows, const std::filesystem::path & path)
{
  auto out = detail::open_output(path);
  out << kManifestHeader << '\n';
  for (const ManifestRow & row : rows) {
    out << row.frame_id << ',' << row.scene_id << ',' << row.cloud_path << '\n';
  }
  detail::finish_output(out, path);
}

std::vector<std::uint8_t> read_mask(const std::filesystem::path & path)
{
  const std::vector<char> bytes = slurp(path);
  std::vector<std::uint8_t> mask(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    mask[i] = bytes[i] != 0 ? 1 : 0;
  }
  return mask;
}

void write_mask(std::span<const std::uint8_t> mask, const std::filesystem::path & path)
{
  auto out = detail::open_output(path, true);
  std::vector<char> bytes(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    bytes[i] = mask[i] != 0 ? 1 : 0;
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  detail::finish_output(out, path);
}

// --- datasets -----------------------------------------------------------------

std::vector<SceneFrame> load_dataset(
  const std::filesystem::path & manifest_path, const std::filesystem::path & labels_path, int fields_per_point)
{
  const auto rows = read_manifest(manifest_path);
  const std::filesystem::path root = manifest_path.parent_path();
  const std::filesystem::path lpath = labels_path.empty() ? root / "labels.csv" : labels_path;

  std::vector<SceneFrame> frames;
  frames.reserve(rows.size());
  std::unordered_map<std::string, std::size_t> by_id;
  for (const ManifestRow & row : rows) {
    SceneFrame f;
    f.frame_id = row.frame_id;
    f.scene_id = row.scene_id;
    f.cloud = read_cloud(root / row.cloud_path, fields_per_point);
    by_id.emplace(f.frame_id, frames.size());
    frames.push_back(std::move(f));
  }
  if (std::filesystem::exists(lpath)) {
    for (LabelRow & lr : read_labels(lpath)) {
      const auto it = by_id.find(lr.frame_id);
      if (it == by_id.end()) {
        throw ValidationError(lpath.string() + ": label references unknown frame " + lr.frame_id);
      }
      frames[it->second].boxes.push_back(std::move(lr.label));
    }
  } else if (!labels_path.empty()) {
    throw MissingInputError("labels file not found: " + lpath.string());
  }
  return frames;
}

void save_dataset(std::span<const SceneFrame> frames, const std::filesystem::path & dir)
{
  std::vector<ManifestRow> manifest;
  std::vector<LabelRow> labels;
  for (const SceneFrame & f : frames) {
    const std::string rel = "clouds/" + f.frame_id + ".bin";
    write_cloud(f.cloud, dir / rel);
    manifest.push_back({f.frame_id, f.scene_id, rel});
    for (const LabeledBox & b : f.boxes) {
      labels.push_back({f.frame_id, b});
    }
  }
  write_manifest(manifest, dir / "manifest.csv");
  write_labels(labels, dir / "labels.csv");
}

// --- bank persistence ---------------------------------------------------------

void save_bank(const ObjectBank & bank, const std::filesystem::path & dir)
{
  const auto mpath = dir / "manifest.csv";
  const auto bpath = dir / "points.blob";
  auto manifest = detail::open_output(mpath);
  auto blob = detail::open_output(bpath, true);
  manifest << kBankHeader << '\n';
  std::size_t offset = 0;
  for (const ObjectSample & s : bank.samples()) {
    const std::vector<char> bytes = encode_points(s.points);
    blob.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    const Box3D & b = s.box;
    manifest << s.sample_id << ',' << s.category;
    for (const double v :
         {b.cx, b.cy, b.cz, b.l, b.w, b.h, b.yaw, s.origin_range, s.origin_azimuth, s.observing_angle}) {
      manifest << ',' << detail::exact(v);
    }
    manifest << ',' << s.points.size() << ',' << offset << ',' << bytes.size() << '\n';
    offset += bytes.size();
  }
  detail::finish_output(manifest, mpath);
  detail::finish_output(blob, bpath);
}

ObjectBank load_bank(const std::filesystem::path & dir)
{
  const auto mpath = dir / "manifest.csv";
  const std::vector<char> blob = slurp(dir / "points.blob");
  auto in = detail::open_input(mpath);
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kBankHeader) {
    throw FormatError(mpath.string() + ":1: unexpected bank manifest header");
  }
  std::vector<ObjectSample> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) {
      continue;
    }
    const std::string where = mpath.string() + ":" + std::to_string(line_no);
    const auto cols = detail::split(line);
    if (cols.size() != 15) {
      throw FormatError(where + ": expected 15 columns, got " + std::to_string(cols.size()));
    }
    ObjectSample s;
    s.sample_id = std::string(cols[0]);
    s.category = std::string(cols[1]);
    double v[10];
    for (int k = 0; k < 10; ++k) {
      if (!detail::parse_double(cols[2 + k], v[k])) {
        throw FormatError(where + ": bad number '" + std::string(cols[2 + k]) + "'");
      }
    }
    s.box = {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
    check_box(s.box, where);
    s.origin_range = v[7];
    s.origin_azimuth = v[8];
    s.observing_angle = v[9];
    std::size_t count = 0;
    std::size_t offset = 0;
    std::size_t length = 0;
    if (!detail::parse_int(cols[12], count) || !detail::parse_int(cols[13], offset) ||
        !detail::parse_int(cols[14], length)) {
      throw FormatError(where + ": bad point count/offset/length");
    }
    if (length != count * kRecordBytes || offset + length > blob.size()) {
      throw FormatError(where + ": blob range out of bounds");
    }
    s.points = decode_points(std::span<const char>(blob).subspan(offset, length), 4);
    samples.push_back(std::move(s));
  }
  return ObjectBank(std::move(samples));
}

}  // namespace scenemix
