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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <vector>

#include "scenemix/error.hpp"
#include "scenemix/fixture.hpp"
#include "scenemix/ground.hpp"
#include "scenemix/placeability.hpp"
#include "scenemix/rng.hpp"
#include "support.hpp"

using namespace scenemix;
using scenemix::test::TempDir;

namespace
{

constexpr double kPi = std::numbers::pi;

std::vector<double> encode_oracle(const Point & p, int order)
{
  const double u[4] = {p.x / 100.0, p.y / 100.0, p.z / 10.0, p.r};
  std::vector<double> out;
  for (const double v : u) {
    out.push_back(v);
    for (int k = 0; k < order; ++k) {
      out.push_back(std::sin(std::pow(2.0, k) * kPi * v));
      out.push_back(std::cos(std::pow(2.0, k) * kPi * v));
    }
  }
  return out;
}

double logit_oracle(const PlaceabilityModel & m, const Point & p)
{
  std::vector<double> x = encode_oracle(p, m.fourier_order);
  for (std::size_t k = 0; k < m.layers.size(); ++k) {
    const DenseLayer & l = m.layers[k];
    std::vector<double> y(l.out);
    for (std::size_t o = 0; o < l.out; ++o) {
      double s = l.bias[o];
      for (std::size_t i = 0; i < l.in; ++i) {
        s += x[i] * l.weight[i * l.out + o];
      }
      y[o] = (k + 1 < m.layers.size()) ? std::max(s, 0.0) : s;
    }
    x = y;
  }
  return x[0];
}

double forward_oracle(const PlaceabilityModel & m, const Point & p)
{
  return 1.0 / (1.0 + std::exp(-logit_oracle(m, p)));
}

double loss_oracle(const PlaceabilityModel & m, const PointCloud & pts, const std::vector<std::uint8_t> & y, double w)
{
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double p = std::clamp(forward_oracle(m, pts[i]), kPredClamp, 1.0 - kPredClamp);
    s += y[i] ? -w * std::log(p) : -std::log(1.0 - p);
  }
  return s / static_cast<double>(pts.size());
}

Point random_point(Rng & rng)
{
  return {rng.uniform(-70, 70), rng.uniform(-70, 70), rng.uniform(-3, 3), rng.uniform()};
}

PlaceabilityModel random_model_with_bias(std::uint64_t seed, int order, std::vector<std::size_t> hidden)
{
  PlaceabilityModel m = PlaceabilityModel::random(order, hidden, seed);
  Rng rng(seed ^ 0x5a5a);
  for (DenseLayer & l : m.layers) {
    for (double & b : l.bias) {
      b = rng.uniform(-0.3, 0.3);
    }
  }
  return m;
}

}  // namespace

TEST_CASE("fourier_encode")
{
  for (int order = 1; order <= 12; ++order) {
    CHECK(fourier_encode({1, 2, 3, 0.4}, order).size() == 4 + 8 * static_cast<std::size_t>(order));
  }

  const auto zero = fourier_encode({0, 0, 0, 0}, 3);
  for (int f = 0; f < 4; ++f) {
    const std::size_t base = static_cast<std::size_t>(f) * 7;
    CHECK(zero[base] == 0.0);
    for (int k = 0; k < 3; ++k) {
      CHECK(zero[base + 1 + 2 * k] == 0.0);
      CHECK(zero[base + 2 + 2 * k] == 1.0);
    }
  }

  // r = 0.5 lands on a quarter period
  const auto half = fourier_encode({0, 0, 0, 0.5}, 1);
  CHECK(half[9] == 0.5);
  CHECK(std::abs(half[10] - 1.0) < 1e-15);
  CHECK(std::abs(half[11]) < 1e-15);

  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const Point p = random_point(rng);
    const auto got = fourier_encode(p, 10);
    const auto want = encode_oracle(p, 10);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(std::abs(got[i] - want[i]) < 1e-12);
    }
  }
}

TEST_CASE("default architecture")
{
  const PlaceabilityModel m = PlaceabilityModel::make_default(3);
  CHECK(m.dims() == std::vector<std::size_t>{84, 64, 64, 64, 1});
  CHECK(m.parameter_count() == 84 * 64 + 64 + 2 * (64 * 64 + 64) + 64 + 1);
  CHECK(m.finite());
  CHECK(m.fourier_order == 10);
}

TEST_CASE("mlp_forward")
{
  const std::size_t hidden[] = {64, 64, 64};
  const PlaceabilityModel zeros = PlaceabilityModel::zeros(10, hidden);
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    CHECK(mlp_forward(zeros, random_point(rng)) == 0.5);
  }

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PlaceabilityModel m = random_model_with_bias(seed, 10, {64, 64, 64});
    for (int i = 0; i < 200; ++i) {
      const Point p = random_point(rng);
      const double got = mlp_forward(m, p);
      CHECK(got >= 0.0);
      CHECK(got <= 1.0);
      CHECK(std::abs(got - forward_oracle(m, p)) < 1e-6);
    }
  }
}

TEST_CASE("batched forward agrees bitwise with single points")
{
  const PlaceabilityModel m = random_model_with_bias(4, 10, {64, 64, 64});
  Rng rng(3);
  PointCloud cloud;
  for (int i = 0; i < 1001; ++i) {
    cloud.push_back(random_point(rng));
  }
  const auto serial = mlp_forward_batch(m, cloud, Execution::serial);
  const auto parallel = mlp_forward_batch(m, cloud, Execution::parallel);
  REQUIRE(serial.size() == cloud.size());
  CHECK(std::memcmp(serial.data(), parallel.data(), serial.size() * sizeof(double)) == 0);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(serial[i] == mlp_forward(m, cloud[i]));
  }
  const auto one = mlp_forward_batch(m, std::span<const Point>(cloud.data(), 1));
  CHECK(one[0] == mlp_forward(m, cloud[0]));

  // permutation equivariance
  PointCloud reversed(cloud.rbegin(), cloud.rend());
  const auto rev = mlp_forward_batch(m, reversed);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(rev[cloud.size() - 1 - i] == serial[i]);
  }

  // a non-default width goes through the generic kernel
  const PlaceabilityModel odd = random_model_with_bias(5, 3, {7, 5});
  for (int i = 0; i < 50; ++i) {
    CHECK(std::abs(mlp_forward(odd, cloud[i]) - forward_oracle(odd, cloud[i])) < 1e-6);
  }
  CHECK(mlp_forward_batch(odd, cloud, Execution::serial) == mlp_forward_batch(odd, cloud, Execution::parallel));
}

TEST_CASE("bce_loss")
{
  CHECK(std::abs(bce_loss(0.5, 1) - std::log(2.0)) < 1e-15);
  CHECK(std::abs(bce_loss(1.0 - 1e-7, 1) - 1e-7) < 1e-12);
  CHECK(std::abs(bce_loss(1.0, 1) - 1e-7) < 1e-12);
  CHECK(std::isfinite(bce_loss(0.0, 1)));
  CHECK(std::abs(bce_loss(0.2, 1, 3.0) - 3.0 * -std::log(0.2)) < 1e-12);
  CHECK(std::abs(bce_loss(0.2, 0, 3.0) - -std::log(0.8)) < 1e-12);

  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform(0.001, 0.999);
    const int y = rng.bernoulli(0.5) ? 1 : 0;
    CHECK(std::abs(bce_loss(p, y) - bce_loss(1.0 - p, 1 - y)) < 1e-12);
  }

  // batch mean from loss_gradient against a summed scalar oracle
  const PlaceabilityModel m = random_model_with_bias(6, 4, {16, 16});
  PointCloud pts;
  std::vector<std::uint8_t> labels;
  for (int i = 0; i < 64; ++i) {
    pts.push_back(random_point(rng));
    labels.push_back(rng.bernoulli(0.4) ? 1 : 0);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    sum += bce_loss(forward_oracle(m, pts[i]), labels[i], 2.0);
  }
  CHECK(std::abs(loss_gradient(m, pts, labels, 2.0).loss - sum / 64.0) < 1e-9);
}

TEST_CASE("analytic gradients match central finite differences")
{
  Rng rng(5);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    PlaceabilityModel m = random_model_with_bias(100 + seed, 2, {8, 8});
    REQUIRE(m.layers.size() == 3);
    PointCloud pts;
    std::vector<std::uint8_t> labels;
    for (int i = 0; i < 16; ++i) {
      pts.push_back(random_point(rng));
      labels.push_back(rng.bernoulli(0.5) ? 1 : 0);
    }
    const double w = 1.5;
    const LossGradient lg = loss_gradient(m, pts, labels, w);
    const double h = 1e-4;
    double worst = 0.0;
    auto probe = [&](double & param, double analytic) {
      const double saved = param;
      param = saved + h;
      const double up = loss_oracle(m, pts, labels, w);
      param = saved - h;
      const double down = loss_oracle(m, pts, labels, w);
      param = saved;
      const double numeric = (up - down) / (2 * h);
      const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      worst = std::max(worst, rel);
    };
    for (std::size_t k = 0; k < m.layers.size(); ++k) {
      for (std::size_t j = 0; j < m.layers[k].weight.size(); ++j) {
        probe(m.layers[k].weight[j], lg.grad[k].weight[j]);
      }
      for (std::size_t j = 0; j < m.layers[k].bias.size(); ++j) {
        probe(m.layers[k].bias[j], lg.grad[k].bias[j]);
      }
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("training separates a two-point toy set")
{
  LabeledCloud lc;
  lc.cloud = {{10, 0, -1.8, 0.1}, {10, 0, 0.5, 0.8}};
  lc.labels = {1, 0};
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.epochs = 200;
  cfg.batch_size = 2;
  cfg.seed = 9;
  const TrainResult r = train(PlaceabilityModel::make_default(9), std::span(&lc, 1), cfg);
  REQUIRE(r.epoch_loss.size() == 200);
  CHECK(r.epoch_loss.back() < r.epoch_loss.front());
  const GroundLabels mask = infer_mask(r.model, lc.cloud);
  CHECK(mask.mask == std::vector<std::uint8_t>{1, 0});
}

TEST_CASE("training is reproducible for a fixed seed")
{
  Rng rng(6);
  LabeledCloud lc;
  for (int i = 0; i < 300; ++i) {
    const Point p = random_point(rng);
    lc.cloud.push_back(p);
    lc.labels.push_back(p.z < 0 ? 1 : 0);
  }
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 32;
  cfg.seed = 1;
  cfg.max_points_per_frame = 200;
  const auto a = train(PlaceabilityModel::make_default(2), std::span(&lc, 1), cfg);
  const auto b = train(PlaceabilityModel::make_default(2), std::span(&lc, 1), cfg);
  CHECK(a.model == b.model);
  CHECK(a.epoch_loss == b.epoch_loss);

  cfg.learning_rate = 1e300;
  CHECK_THROWS_AS(train(PlaceabilityModel::make_default(2), std::span(&lc, 1), cfg), ValidationError);
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(train(PlaceabilityModel::make_default(2), std::span(&lc, 1), cfg), ValidationError);
  CHECK_THROWS_AS(train(PlaceabilityModel::make_default(2), {}, TrainConfig{}), ValidationError);
}

TEST_CASE("non-finite loss names the epoch and batch")
{
  LabeledCloud lc;
  lc.cloud = {{1, 2, 3, 0.5}};
  lc.labels = {1};
  PlaceabilityModel m = PlaceabilityModel::make_default(1);
  m.layers.back().bias[0] = std::nan("");
  TrainConfig cfg;
  cfg.epochs = 1;
  try {
    train(m, std::span(&lc, 1), cfg);
    FAIL("expected a validation error");
  } catch (const ValidationError & e) {
    const std::string what = e.what();
    CHECK(what.find("epoch 0") != std::string::npos);
    CHECK(what.find("batch 0") != std::string::npos);
  }
}

TEST_CASE("infer_mask thresholds")
{
  const std::size_t hidden[] = {64, 64, 64};
  const PlaceabilityModel half = PlaceabilityModel::zeros(10, hidden);
  Rng rng(7);
  PointCloud cloud;
  for (int i = 0; i < 100; ++i) {
    cloud.push_back(random_point(rng));
  }
  const auto all = infer_mask(half, cloud, 0.5);
  CHECK(std::all_of(all.mask.begin(), all.mask.end(), [](auto v) { return v == 1; }));
  const auto none = infer_mask(half, cloud, 1.1);
  CHECK(std::all_of(none.mask.begin(), none.mask.end(), [](auto v) { return v == 0; }));

  const PlaceabilityModel m = random_model_with_bias(8, 10, {64, 64, 64});
  const auto mask = infer_mask(m, cloud, 0.5);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(mask.mask[i] == (mlp_forward(m, cloud[i]) >= 0.5 ? 1 : 0));
  }
}

TEST_CASE("model file round trip")
{
  TempDir dir("model");
  const PlaceabilityModel m = quantize(random_model_with_bias(9, 10, {64, 64, 64}));
  save_model(m, dir / "m.rapm");
  const PlaceabilityModel back = load_model(dir / "m.rapm");
  CHECK(back == m);
  const auto bytes = test::read_bytes(dir / "m.rapm");
  REQUIRE(bytes.size() > 4);
  CHECK(std::string(bytes.data(), 4) == "RAPM");
  CHECK(bytes.size() == 4 + 4 * 3 + 4 * 5 + 4 * m.parameter_count());

  // a full-precision model is stored at float32 precision
  const PlaceabilityModel raw = random_model_with_bias(10, 2, {4});
  save_model(raw, dir / "raw.rapm");
  CHECK(load_model(dir / "raw.rapm") == quantize(raw));

  std::vector<char> corrupt = bytes;
  corrupt[0] = 'X';
  {
    std::ofstream out(dir / "bad.rapm", std::ios::binary);
    out.write(corrupt.data(), static_cast<std::streamsize>(corrupt.size()));
  }
  CHECK_THROWS_AS(load_model(dir / "bad.rapm"), FormatError);
  {
    std::ofstream out(dir / "short.rapm", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 3));
  }
  CHECK_THROWS_AS(load_model(dir / "short.rapm"), FormatError);
  CHECK_THROWS_AS(load_model(dir / "none.rapm"), MissingInputError);
}

TEST_CASE("estimator learns fixture ground from plane-fit labels")
{
  std::vector<LabeledCloud> train_set;
  for (int i = 0; i < 10; ++i) {
    const FixtureFrame f = generate_fixture_frame(7, i);
    train_set.push_back({f.frame.cloud, ground_fit(f.frame.cloud).mask});
  }
  TrainConfig cfg;
  cfg.seed = 7;
  const TrainResult r = train(PlaceabilityModel::make_default(7), train_set, cfg);
  std::size_t right = 0;
  std::size_t total = 0;
  for (int i = 10; i < 13; ++i) {
    const FixtureFrame f = generate_fixture_frame(7, i);
    const auto truth = ground_fit(f.frame.cloud).mask;
    const auto pred = infer_mask(r.model, f.frame.cloud).mask;
    for (std::size_t k = 0; k < truth.size(); ++k) {
      right += truth[k] == pred[k] ? 1 : 0;
    }
    total += truth.size();
  }
  const double acc = static_cast<double>(right) / static_cast<double>(total);
  MESSAGE("held-out accuracy " << acc);
  CHECK(acc >= 0.95);
}
