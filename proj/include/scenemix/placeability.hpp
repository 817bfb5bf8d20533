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

#ifndef SCENEMIX__PLACEABILITY_HPP_
#define SCENEMIX__PLACEABILITY_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "scenemix/execution.hpp"
#include "scenemix/geometry.hpp"
#include "scenemix/ground.hpp"

namespace scenemix
{

inline constexpr int kDefaultFourierOrder = 10;
inline constexpr int kDefaultHiddenWidth = 64;

/// Per-field scaling applied before encoding: x, y in hectometers, z in decameters, r as is.
inline constexpr std::array<double, 4> kFourierInputScale{0.01, 0.01, 0.1, 1.0};

constexpr std::size_t fourier_dim(int order)
{
  return 4 + 8 * static_cast<std::size_t>(order);
}

/**
 * Fourier features of a point. For each scaled field u (x, y, z, r) emits
 * u, then sin(2^k pi u), cos(2^k pi u) for k = 0..order-1. `out` must hold
 * fourier_dim(order) values.
 *
 * Higher octaves come from the double-angle recurrence seeded by one sin/cos
 * pair per field.
 */
void fourier_encode(const Point & p, int order, std::span<double> out);
std::vector<double> fourier_encode(const Point & p, int order);

/// Dense layer y = x * weight + bias, weight stored row-major as [in][out].
struct DenseLayer
{
  std::size_t in{0};
  std::size_t out{0};
  std::vector<double> weight;
  std::vector<double> bias;

  double & w(std::size_t i, std::size_t o) { return weight[i * out + o]; }
  double w(std::size_t i, std::size_t o) const { return weight[i * out + o]; }

  friend bool operator==(const DenseLayer &, const DenseLayer &) = default;
};

/// Fourier encoder followed by a ReLU MLP with a logistic scalar head.
struct PlaceabilityModel
{
  int fourier_order{kDefaultFourierOrder};
  std::vector<DenseLayer> layers;

  /// Layer widths from input to output, e.g. {84, 64, 64, 64, 1}.
  std::vector<std::size_t> dims() const;
  std::size_t parameter_count() const;
  bool finite() const;

  /// Zero weights and biases.
  static PlaceabilityModel zeros(int order, std::span<const std::size_t> hidden);
  /// He-uniform weights, zero biases.
  static PlaceabilityModel random(int order, std::span<const std::size_t> hidden, std::uint64_t seed);
  /// Default architecture: encoder(order) -> 64 -> 64 -> 64 -> 1.
  static PlaceabilityModel make_default(std::uint64_t seed, int order = kDefaultFourierOrder);

  friend bool operator==(const PlaceabilityModel &, const PlaceabilityModel &) = default;
};

double logistic(double z);

/// Placeability of one point in [0, 1]. Same arithmetic as the batched kernel.
double mlp_forward(const PlaceabilityModel & model, const Point & p);

/// Placeability of every point; serial and parallel execution are bit-identical.
std::vector<double> mlp_forward_batch(
  const PlaceabilityModel & model, std::span<const Point> cloud, Execution exec = Execution::parallel);

inline constexpr double kPredClamp = 1e-7;

/// Weighted binary cross-entropy with the prediction clamped to [1e-7, 1 - 1e-7].
double bce_loss(double pred, int label, double positive_weight = 1.0);

struct TrainConfig
{
  double learning_rate{0.05};
  int epochs{20};
  std::size_t batch_size{256};
  std::uint64_t seed{0};
  double positive_class_weight{1.0};
  /// Per-frame random subsample used for training; 0 keeps every point.
  std::size_t max_points_per_frame{4096};
};

struct LabeledCloud
{
  PointCloud cloud;
  std::vector<std::uint8_t> labels;
};

/// Mean weighted BCE over a batch and its gradient for every weight and bias.
struct LossGradient
{
  double loss{0.0};
  std::vector<DenseLayer> grad;
};

/// Backpropagation through the dense stack; the Fourier features are fixed inputs.
LossGradient loss_gradient(
  const PlaceabilityModel & model, std::span<const Point> points, std::span<const std::uint8_t> labels,
  double positive_weight = 1.0);

struct TrainResult
{
  PlaceabilityModel model;
  std::vector<double> epoch_loss;
};

/// Mini-batch gradient descent on mean weighted BCE. Single-threaded and
/// deterministic for a fixed seed. Throws ValidationError on a non-finite loss.
TrainResult train(PlaceabilityModel model, std::span<const LabeledCloud> data, const TrainConfig & cfg);

GroundLabels infer_mask(
  const PlaceabilityModel & model, std::span<const Point> cloud, double threshold = 0.5,
  Execution exec = Execution::parallel);

/// Rounds every parameter to float32, the precision of the model file.
PlaceabilityModel quantize(PlaceabilityModel model);

/// Binary model file: "RAPM", u32 version, u32 fourier order, u32 layer count,
/// u32 widths (count + 1), then per layer the [in][out] weights and the biases
/// as little-endian float32.
void save_model(const PlaceabilityModel & model, const std::filesystem::path & path);
PlaceabilityModel load_model(const std::filesystem::path & path);

}  // namespace scenemix

#endif  // SCENEMIX__PLACEABILITY_HPP_
