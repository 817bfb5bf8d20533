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

#include "scenemix/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include "scenemix/error.hpp"
#include "text_util.hpp"

namespace scenemix
{

KeyValueConfig KeyValueConfig::parse(const std::string & text, const std::string & origin)
{
  KeyValueConfig kv;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    std::string_view body = detail::trim(std::string_view(line).substr(0, hash));
    if (body.empty()) {
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError(origin + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key(detail::trim(body.substr(0, eq)));
    if (key.empty()) {
      throw ValidationError(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    kv.set(key, std::string(detail::trim(body.substr(eq + 1))));
  }
  return kv;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path & path)
{
  auto in = detail::open_input(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void KeyValueConfig::set_assignment(const std::string & assignment)
{
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("expected key=value, got '" + assignment + "'");
  }
  set(std::string(detail::trim(std::string_view(assignment).substr(0, eq))),
      std::string(detail::trim(std::string_view(assignment).substr(eq + 1))));
}

namespace
{

double to_double(const std::string & key, const std::string & v)
{
  double out = 0.0;
  if (!detail::parse_double(v, out) || !std::isfinite(out)) {
    throw ValidationError("config " + key + ": expected a number, got '" + v + "'");
  }
  return out;
}

long long to_int(const std::string & key, const std::string & v)
{
  long long out = 0;
  if (!detail::parse_int(v, out)) {
    throw ValidationError("config " + key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string & key, const std::string & v)
{
  if (v == "true" || v == "1" || v == "yes") {
    return true;
  }
  if (v == "false" || v == "0" || v == "no") {
    return false;
  }
  throw ValidationError("config " + key + ": expected true/false, got '" + v + "'");
}

std::vector<double> to_list(const std::string & key, std::string v)
{
  std::erase_if(v, [](char c) { return c == '[' || c == ']' || c == ' '; });
  std::vector<double> out;
  if (v.empty()) {
    return out;
  }
  for (const auto part : detail::split(v)) {
    out.push_back(to_double(key, std::string(part)));
  }
  return out;
}

std::string join(const std::vector<double> & xs)
{
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s += (i ? "," : "") + detail::exact(xs[i]);
  }
  return s;
}

}  // namespace

RunConfig resolve_config(const KeyValueConfig & kv)
{
  RunConfig c;
  using Setter = std::function<void(const std::string &, const std::string &)>;
  auto num = [](double & dst) -> Setter { return [&dst](const std::string & k, const std::string & v) { dst = to_double(k, v); }; };
  auto integer = [](int & dst) -> Setter {
    return [&dst](const std::string & k, const std::string & v) { dst = static_cast<int>(to_int(k, v)); };
  };
  auto size = [](std::size_t & dst) -> Setter {
    return [&dst](const std::string & k, const std::string & v) {
      const long long n = to_int(k, v);
      if (n < 0) {
        throw ValidationError("config " + k + " must be >= 0");
      }
      dst = static_cast<std::size_t>(n);
    };
  };
  auto path = [](std::filesystem::path & dst) -> Setter { return [&dst](const std::string &, const std::string & v) { dst = v; }; };

  const std::map<std::string, Setter> setters{
    {"dataset.manifest", path(c.manifest)},
    {"dataset.labels", path(c.labels)},
    {"dataset.fields_per_point", integer(c.fields_per_point)},
    {"bank.path", path(c.bank)},
    {"bank.min_points", integer(c.bank_min_points)},
    {"model.path", path(c.model)},
    {"masks.path", path(c.masks)},
    {"seed",
     [&c](const std::string & k, const std::string & v) {
       const long long s = to_int(k, v);
       if (s < 0) {
         throw ValidationError("config seed must be >= 0");
       }
       c.seed = static_cast<std::uint64_t>(s);
       c.seed_set = true;
     }},
    {"workers", integer(c.workers)},
    {"composition.delta_policy",
     [&c](const std::string & k, const std::string & v) {
       if (v == "half_length") {
         c.composition.delta_policy = DeltaPolicy::half_length;
       } else if (v == "fixed") {
         c.composition.delta_policy = DeltaPolicy::fixed;
       } else {
         throw ValidationError("config " + k + ": expected half_length or fixed");
       }
     }},
    {"composition.fixed_delta", num(c.composition.fixed_delta)},
    {"composition.placeability_threshold", num(c.composition.placeability_threshold)},
    {"composition.support_radius_scale", num(c.composition.support_radius_scale)},
    {"composition.min_support_points", integer(c.composition.min_support_points)},
    {"composition.min_support_fraction", num(c.composition.min_support_fraction)},
    {"composition.position_attempts", integer(c.composition.position_attempts)},
    {"composition.object_retries", integer(c.composition.object_retries)},
    {"composition.remove_occupied",
     [&c](const std::string & k, const std::string & v) { c.composition.remove_occupied = to_bool(k, v); }},
    {"schedule.alpha_start", num(c.schedule.alpha_start)},
    {"schedule.beta_steps", [&c](const std::string & k, const std::string & v) { c.schedule.beta_steps = to_list(k, v); }},
    {"schedule.beta_factor", num(c.schedule.beta_factor)},
    {"voxel.vx", num(c.voxel.vx)},
    {"voxel.vy", num(c.voxel.vy)},
    {"voxel.vz", num(c.voxel.vz)},
    {"voxel.stride", integer(c.voxel.stride)},
    {"voxel.x_min", num(c.voxel.x_min)},
    {"voxel.x_max", num(c.voxel.x_max)},
    {"voxel.y_min", num(c.voxel.y_min)},
    {"voxel.y_max", num(c.voxel.y_max)},
    {"voxel.z_min", num(c.voxel.z_min)},
    {"voxel.z_max", num(c.voxel.z_max)},
    {"ground.ring_edges", [&c](const std::string & k, const std::string & v) { c.ground.ring_edges = to_list(k, v); }},
    {"ground.sectors", integer(c.ground.sectors)},
    {"ground.seed_fraction", num(c.ground.seed_fraction)},
    {"ground.epsilon", num(c.ground.epsilon)},
    {"ground.iterations", integer(c.ground.iterations)},
    {"ground.min_cell_points", integer(c.ground.min_cell_points)},
    {"train.learning_rate", num(c.train.learning_rate)},
    {"train.epochs", integer(c.train.epochs)},
    {"train.batch_size", size(c.train.batch_size)},
    {"train.positive_class_weight", num(c.train.positive_class_weight)},
    {"train.max_points_per_frame", size(c.train.max_points_per_frame)},
    {"train.fourier_order", integer(c.fourier_order)},
  };

  const std::string n_plain_prefix = "schedule.n_plain.";
  bool n_plain_given = false;
  std::map<std::string, int> n_plain;
  for (const auto & [key, value] : kv.values()) {
    if (key.starts_with(n_plain_prefix)) {
      const std::string category = key.substr(n_plain_prefix.size());
      if (category.empty()) {
        throw ValidationError("config " + key + ": missing category name");
      }
      n_plain[category] = static_cast<int>(to_int(key, value));
      n_plain_given = true;
      continue;
    }
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ValidationError("unknown config key '" + key + "'");
    }
    it->second(key, value);
  }
  if (n_plain_given) {
    c.schedule.n_plain = std::move(n_plain);
  }
  c.schedule.seed = c.seed;
  c.train.seed = c.seed;

  if (c.fields_per_point != 4 && c.fields_per_point != 5) {
    throw ValidationError("dataset.fields_per_point must be 4 or 5");
  }
  if (c.bank_min_points < 1) {
    throw ValidationError("bank.min_points must be >= 1");
  }
  if (c.workers < 1) {
    throw ValidationError("workers must be >= 1");
  }
  if (c.fourier_order < 1) {
    throw ValidationError("train.fourier_order must be >= 1");
  }
  c.composition.validate();
  c.schedule.validate();
  c.voxel.validate();
  return c;
}

std::string to_text(const RunConfig & c)
{
  std::ostringstream o;
  auto kv = [&o](const std::string & k, const auto & v) { o << k << '=' << v << '\n'; };
  auto num = [&o](const std::string & k, double v) { o << k << '=' << detail::exact(v) << '\n'; };
  kv("dataset.manifest", c.manifest.string());
  kv("dataset.labels", c.labels.string());
  kv("dataset.fields_per_point", c.fields_per_point);
  kv("bank.path", c.bank.string());
  kv("bank.min_points", c.bank_min_points);
  kv("model.path", c.model.string());
  kv("masks.path", c.masks.string());
  kv("seed", c.seed);
  kv("workers", c.workers);
  kv("composition.delta_policy", c.composition.delta_policy == DeltaPolicy::half_length ? "half_length" : "fixed");
  num("composition.fixed_delta", c.composition.fixed_delta);
  num("composition.placeability_threshold", c.composition.placeability_threshold);
  num("composition.support_radius_scale", c.composition.support_radius_scale);
  kv("composition.min_support_points", c.composition.min_support_points);
  num("composition.min_support_fraction", c.composition.min_support_fraction);
  kv("composition.position_attempts", c.composition.position_attempts);
  kv("composition.object_retries", c.composition.object_retries);
  kv("composition.remove_occupied", c.composition.remove_occupied ? "true" : "false");
  num("schedule.alpha_start", c.schedule.alpha_start);
  kv("schedule.beta_steps", join(c.schedule.beta_steps));
  num("schedule.beta_factor", c.schedule.beta_factor);
  for (const auto & [category, n] : c.schedule.n_plain) {
    kv("schedule.n_plain." + category, n);
  }
  num("voxel.vx", c.voxel.vx);
  num("voxel.vy", c.voxel.vy);
  num("voxel.vz", c.voxel.vz);
  kv("voxel.stride", c.voxel.stride);
  num("voxel.x_min", c.voxel.x_min);
  num("voxel.x_max", c.voxel.x_max);
  num("voxel.y_min", c.voxel.y_min);
  num("voxel.y_max", c.voxel.y_max);
  num("voxel.z_min", c.voxel.z_min);
  num("voxel.z_max", c.voxel.z_max);
  kv("ground.ring_edges", join(c.ground.ring_edges));
  kv("ground.sectors", c.ground.sectors);
  num("ground.seed_fraction", c.ground.seed_fraction);
  num("ground.epsilon", c.ground.epsilon);
  kv("ground.iterations", c.ground.iterations);
  kv("ground.min_cell_points", c.ground.min_cell_points);
  num("train.learning_rate", c.train.learning_rate);
  kv("train.epochs", c.train.epochs);
  kv("train.batch_size", c.train.batch_size);
  num("train.positive_class_weight", c.train.positive_class_weight);
  kv("train.max_points_per_frame", c.train.max_points_per_frame);
  kv("train.fourier_order", c.fourier_order);
  return o.str();
}

}  // namespace scenemix
