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

// Training is single-threaded by contract; keep Eigen's GEMM serial as well.
#define EIGEN_DONT_PARALLELIZE
#include "scenemix/placeability.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <string>

#include "scenemix/error.hpp"
#include "scenemix/rng.hpp"
#include "text_util.hpp"

namespace scenemix
{

namespace
{

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

constexpr char kMagic[4] = {'R', 'A', 'P', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

std::vector<std::size_t> layer_widths(int order, std::span<const std::size_t> hidden)
{
  if (order < 1) {
    throw ValidationError("fourier order must be >= 1");
  }
  std::vector<std::size_t> widths{fourier_dim(order)};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(1);
  return widths;
}

}  // namespace

void fourier_encode(const Point & p, int order, std::span<double> out)
{
  const double fields[4] = {p.x, p.y, p.z, p.r};
  const auto per_field = 1 + 2 * static_cast<std::size_t>(order);
  for (std::size_t f = 0; f < 4; ++f) {
    const double u = fields[f] * kFourierInputScale[f];
    double * dst = out.data() + f * per_field;
    dst[0] = u;
    double s = std::sin(std::numbers::pi * u);
    double c = std::cos(std::numbers::pi * u);
    for (int k = 0; k < order; ++k) {
      dst[1 + 2 * k] = s;
      dst[2 + 2 * k] = c;
      const double s2 = 2.0 * s * c;
      c = (c - s) * (c + s);
      s = s2;
    }
  }
}

std::vector<double> fourier_encode(const Point & p, int order)
{
  if (order < 1) {
    throw ValidationError("fourier order must be >= 1");
  }
  std::vector<double> out(fourier_dim(order));
  fourier_encode(p, order, out);
  return out;
}

// --- model --------------------------------------------------------------------

std::vector<std::size_t> PlaceabilityModel::dims() const
{
  std::vector<std::size_t> d;
  if (layers.empty()) {
    return d;
  }
  d.push_back(layers.front().in);
  for (const DenseLayer & l : layers) {
    d.push_back(l.out);
  }
  return d;
}

std::size_t PlaceabilityModel::parameter_count() const
{
  std::size_t n = 0;
  for (const DenseLayer & l : layers) {
    n += l.weight.size() + l.bias.size();
  }
  return n;
}

bool PlaceabilityModel::finite() const
{
  for (const DenseLayer & l : layers) {
    for (const double v : l.weight) {
      if (!std::isfinite(v)) {
        return false;
      }
    }
    for (const double v : l.bias) {
      if (!std::isfinite(v)) {
        return false;
      }
    }
  }
  return true;
}

PlaceabilityModel PlaceabilityModel::zeros(int order, std::span<const std::size_t> hidden)
{
  const auto widths = layer_widths(order, hidden);
  PlaceabilityModel m;
  m.fourier_order = order;
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    DenseLayer l;
    l.in = widths[k];
    l.out = widths[k + 1];
    l.weight.assign(l.in * l.out, 0.0);
    l.bias.assign(l.out, 0.0);
    m.layers.push_back(std::move(l));
  }
  return m;
}

PlaceabilityModel PlaceabilityModel::random(int order, std::span<const std::size_t> hidden, std::uint64_t seed)
{
  PlaceabilityModel m = zeros(order, hidden);
  Rng rng(seed);
  for (DenseLayer & l : m.layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.in));
    for (double & v : l.weight) {
      v = rng.uniform(-limit, limit);
    }
  }
  return m;
}

PlaceabilityModel PlaceabilityModel::make_default(std::uint64_t seed, int order)
{
  const std::size_t hidden[] = {kDefaultHiddenWidth, kDefaultHiddenWidth, kDefaultHiddenWidth};
  return random(order, hidden, seed);
}

double logistic(double z)
{
  return 1.0 / (1.0 + std::exp(-z));
}

// --- inference kernel ---------------------------------------------------------

namespace
{

// Inference runs in float32, the precision the model file stores.
struct PackedLayer
{
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<float> weight;
  std::vector<float> bias;
};

// Points evaluated together so each weight row is loaded once per block.
constexpr std::size_t kBlock = 6;

struct Workspace
{
  explicit Workspace(const PlaceabilityModel & model) : order(model.fourier_order)
  {
    std::size_t width = fourier_dim(order);
    for (const DenseLayer & l : model.layers) {
      PackedLayer & pl = layers.emplace_back();
      pl.in = l.in;
      pl.out = l.out;
      pl.weight.assign(l.weight.begin(), l.weight.end());
      pl.bias.assign(l.bias.begin(), l.bias.end());
      width = std::max({width, l.in, l.out});
    }
    encoded.resize(fourier_dim(order));
    a.resize(kBlock * width);
    b.resize(kBlock * width);
  }

  int order;
  std::vector<PackedLayer> layers;
  std::vector<double> encoded;
  std::vector<float> a;
  std::vector<float> b;
};

// Dense layer over a block of points with a compile-time width so the
// accumulators stay in registers. `in` and `out` are [kBlock][stride].
template <std::size_t Out>
void dense_fixed(const PackedLayer & layer, const float * __restrict in, std::size_t in_stride, float * __restrict out)
{
  float acc[kBlock][Out];
  for (std::size_t p = 0; p < kBlock; ++p) {
    for (std::size_t o = 0; o < Out; ++o) {
      acc[p][o] = layer.bias[o];
    }
  }
  const float * __restrict w = layer.weight.data();
  for (std::size_t i = 0; i < layer.in; ++i) {
    const float * __restrict row = w + i * Out;
    for (std::size_t p = 0; p < kBlock; ++p) {
      const float x = in[p * in_stride + i];
      for (std::size_t o = 0; o < Out; ++o) {
        acc[p][o] += x * row[o];
      }
    }
  }
  for (std::size_t p = 0; p < kBlock; ++p) {
    for (std::size_t o = 0; o < Out; ++o) {
      out[p * Out + o] = acc[p][o];
    }
  }
}

void dense_any(const PackedLayer & layer, const float * __restrict in, std::size_t in_stride, float * __restrict out)
{
  const std::size_t width = layer.out;
  const float * __restrict w = layer.weight.data();
  for (std::size_t p = 0; p < kBlock; ++p) {
    float * __restrict dst = out + p * width;
    std::copy(layer.bias.begin(), layer.bias.end(), dst);
    for (std::size_t i = 0; i < layer.in; ++i) {
      const float x = in[p * in_stride + i];
      const float * __restrict row = w + i * width;
      for (std::size_t o = 0; o < width; ++o) {
        dst[o] += x * row[o];
      }
    }
  }
}

// Forward pass over exactly kBlock points. Every point, whatever its slot or
// caller, runs through this one out-of-line routine, which is what makes the
// single-point, serial and parallel paths agree bitwise.
[[gnu::noinline]] void forward_block(const Point * const * pts, double * scores, Workspace & ws)
{
  float * a = ws.a.data();
  float * b = ws.b.data();
  std::size_t stride = ws.encoded.size();
  for (std::size_t p = 0; p < kBlock; ++p) {
    fourier_encode(*pts[p], ws.order, ws.encoded);
    std::copy(ws.encoded.begin(), ws.encoded.end(), a + p * stride);
  }
  const std::size_t n_layers = ws.layers.size();
  for (std::size_t k = 0; k < n_layers; ++k) {
    const PackedLayer & layer = ws.layers[k];
    if (layer.out == kDefaultHiddenWidth) {
      dense_fixed<kDefaultHiddenWidth>(layer, a, stride, b);
    } else {
      dense_any(layer, a, stride, b);
    }
    if (k + 1 < n_layers) {
      for (std::size_t j = 0; j < kBlock * layer.out; ++j) {
        b[j] = b[j] > 0.0f ? b[j] : 0.0f;
      }
    }
    std::swap(a, b);
    stride = layer.out;
  }
  for (std::size_t p = 0; p < kBlock; ++p) {
    scores[p] = logistic(static_cast<double>(a[p * stride]));
  }
}

// Scores points [begin, end); a short tail block is padded with its last point.
void forward_range(std::span<const Point> cloud, std::size_t begin, std::size_t end, double * out, Workspace & ws)
{
  const Point * pts[kBlock];
  double scores[kBlock];
  for (std::size_t start = begin; start < end; start += kBlock) {
    const std::size_t len = std::min(kBlock, end - start);
    for (std::size_t p = 0; p < kBlock; ++p) {
      pts[p] = &cloud[start + std::min(p, len - 1)];
    }
    forward_block(pts, scores, ws);
    std::copy(scores, scores + len, out + start);
  }
}

}  // namespace

double mlp_forward(const PlaceabilityModel & model, const Point & p)
{
  Workspace ws(model);
  double out = 0.0;
  forward_range(std::span<const Point>(&p, 1), 0, 1, &out, ws);
  return out;
}

std::vector<double> mlp_forward_batch(const PlaceabilityModel & model, std::span<const Point> cloud, Execution exec)
{
  std::vector<double> out(cloud.size());
  if (exec == Execution::serial) {
    Workspace ws(model);
    forward_range(cloud, 0, cloud.size(), out.data(), ws);
    return out;
  }
  // chunks are multiples of the block so the block layout matches the serial path
  constexpr std::size_t kChunk = 64 * kBlock;
  const auto n_chunks = static_cast<std::ptrdiff_t>((cloud.size() + kChunk - 1) / kChunk);
#pragma omp parallel
  {
    Workspace ws(model);
#pragma omp for schedule(static)
    for (std::ptrdiff_t c = 0; c < n_chunks; ++c) {
      const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
      forward_range(cloud, begin, std::min(cloud.size(), begin + kChunk), out.data(), ws);
    }
  }
  return out;
}

GroundLabels infer_mask(const PlaceabilityModel & model, std::span<const Point> cloud, double threshold, Execution exec)
{
  const std::vector<double> scores = mlp_forward_batch(model, cloud, exec);
  GroundLabels labels;
  labels.mask.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    labels.mask[i] = scores[i] >= threshold ? 1 : 0;
  }
  return labels;
}

// --- loss and gradients -------------------------------------------------------

double bce_loss(double pred, int label, double positive_weight)
{
  const double p = std::clamp(pred, kPredClamp, 1.0 - kPredClamp);
  const double y = label != 0 ? 1.0 : 0.0;
  return -(positive_weight * y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

namespace
{

RowMatrix encode_rows(std::span<const Point> points, int order)
{
  RowMatrix x(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(fourier_dim(order)));
  for (std::size_t i = 0; i < points.size(); ++i) {
    fourier_encode(points[i], order, std::span<double>(x.row(static_cast<Eigen::Index>(i)).data(), fourier_dim(order)));
  }
  return x;
}

// Loss and gradients for pre-encoded inputs.
LossGradient loss_gradient_encoded(
  const PlaceabilityModel & model, const RowMatrix & x, std::span<const std::uint8_t> labels, double positive_weight)
{
  const Eigen::Index batch = x.rows();
  const std::size_t n_layers = model.layers.size();

  std::vector<RowMatrix> pre(n_layers);
  std::vector<RowMatrix> act(n_layers + 1);
  act[0] = x;
  for (std::size_t k = 0; k < n_layers; ++k) {
    const DenseLayer & l = model.layers[k];
    const ConstMatrixMap w(l.weight.data(), static_cast<Eigen::Index>(l.in), static_cast<Eigen::Index>(l.out));
    const Eigen::Map<const Eigen::RowVectorXd> bias(l.bias.data(), static_cast<Eigen::Index>(l.out));
    pre[k] = act[k] * w;
    pre[k].rowwise() += bias;
    act[k + 1] = (k + 1 < n_layers) ? RowMatrix(pre[k].cwiseMax(0.0)) : pre[k];
  }

  LossGradient result;
  RowMatrix delta(batch, 1);
  double loss = 0.0;
  const double inv_batch = 1.0 / static_cast<double>(batch);
  for (Eigen::Index i = 0; i < batch; ++i) {
    const double p = logistic(pre.back()(i, 0));
    const int y = labels[static_cast<std::size_t>(i)] != 0 ? 1 : 0;
    loss += bce_loss(p, y, positive_weight);
    const bool clamped = p < kPredClamp || p > 1.0 - kPredClamp;
    const double g = y != 0 ? -positive_weight * (1.0 - p) : p;
    delta(i, 0) = clamped ? 0.0 : g * inv_batch;
  }
  result.loss = loss * inv_batch;

  result.grad.resize(n_layers);
  for (std::size_t k = n_layers; k-- > 0;) {
    const DenseLayer & l = model.layers[k];
    DenseLayer & g = result.grad[k];
    g.in = l.in;
    g.out = l.out;
    g.weight.resize(l.weight.size());
    g.bias.resize(l.bias.size());
    Eigen::Map<RowMatrix>(g.weight.data(), static_cast<Eigen::Index>(l.in), static_cast<Eigen::Index>(l.out)) =
      act[k].transpose() * delta;
    // explicit row order: Eigen's vectorized reduction depends on buffer alignment
    std::fill(g.bias.begin(), g.bias.end(), 0.0);
    for (Eigen::Index i = 0; i < batch; ++i) {
      for (std::size_t o = 0; o < l.out; ++o) {
        g.bias[o] += delta(i, static_cast<Eigen::Index>(o));
      }
    }
    if (k > 0) {
      const ConstMatrixMap w(l.weight.data(), static_cast<Eigen::Index>(l.in), static_cast<Eigen::Index>(l.out));
      RowMatrix back = delta * w.transpose();
      delta = back.cwiseProduct((pre[k - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return result;
}

}  // namespace

LossGradient loss_gradient(
  const PlaceabilityModel & model, std::span<const Point> points, std::span<const std::uint8_t> labels,
  double positive_weight)
{
  if (points.size() != labels.size() || points.empty()) {
    throw ValidationError("loss_gradient: points and labels must be nonempty and aligned");
  }
  return loss_gradient_encoded(model, encode_rows(points, model.fourier_order), labels, positive_weight);
}

TrainResult train(PlaceabilityModel model, std::span<const LabeledCloud> data, const TrainConfig & cfg)
{
  if (data.empty()) {
    throw ValidationError("training needs at least one labeled frame");
  }
  if (!(cfg.learning_rate > 0.0) || cfg.epochs < 1 || cfg.batch_size < 1) {
    throw ValidationError("training needs learning_rate > 0, epochs >= 1, batch_size >= 1");
  }
  Rng rng(cfg.seed);

  // fixed per-frame subsample
  PointCloud points;
  std::vector<std::uint8_t> labels;
  for (const LabeledCloud & lc : data) {
    if (lc.cloud.size() != lc.labels.size()) {
      throw ValidationError("training frame has mismatched cloud and label sizes");
    }
    std::vector<std::size_t> order(lc.cloud.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      order[i] = i;
    }
    std::size_t keep = order.size();
    if (cfg.max_points_per_frame > 0 && keep > cfg.max_points_per_frame) {
      keep = cfg.max_points_per_frame;
      for (std::size_t i = 0; i < keep; ++i) {
        std::swap(order[i], order[i + rng.index(order.size() - i)]);
      }
      std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
    }
    for (std::size_t i = 0; i < keep; ++i) {
      points.push_back(lc.cloud[order[i]]);
      labels.push_back(lc.labels[order[i]]);
    }
  }
  if (points.empty()) {
    throw ValidationError("training set is empty");
  }

  const RowMatrix features = encode_rows(points, model.fourier_order);
  const std::size_t n = points.size();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) {
    perm[i] = i;
  }

  TrainResult result;
  RowMatrix batch_x;
  std::vector<std::uint8_t> batch_y;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) {
      std::swap(perm[i - 1], perm[rng.index(i)]);
    }
    double epoch_loss = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_no) {
      const std::size_t len = std::min(cfg.batch_size, n - start);
      batch_x.resize(static_cast<Eigen::Index>(len), features.cols());
      batch_y.resize(len);
      for (std::size_t j = 0; j < len; ++j) {
        batch_x.row(static_cast<Eigen::Index>(j)) = features.row(static_cast<Eigen::Index>(perm[start + j]));
        batch_y[j] = labels[perm[start + j]];
      }
      const LossGradient lg = loss_gradient_encoded(model, batch_x, batch_y, cfg.positive_class_weight);
      if (!std::isfinite(lg.loss)) {
        throw ValidationError(
          "non-finite training loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_no));
      }
      epoch_loss += lg.loss * static_cast<double>(len);
      for (std::size_t k = 0; k < model.layers.size(); ++k) {
        DenseLayer & l = model.layers[k];
        const DenseLayer & g = lg.grad[k];
        for (std::size_t j = 0; j < l.weight.size(); ++j) {
          l.weight[j] -= cfg.learning_rate * g.weight[j];
        }
        for (std::size_t j = 0; j < l.bias.size(); ++j) {
          l.bias[j] -= cfg.learning_rate * g.bias[j];
        }
      }
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(n));
  }
  result.model = std::move(model);
  return result;
}

// --- persistence --------------------------------------------------------------

PlaceabilityModel quantize(PlaceabilityModel model)
{
  for (DenseLayer & l : model.layers) {
    for (double & v : l.weight) {
      v = static_cast<float>(v);
    }
    for (double & v : l.bias) {
      v = static_cast<float>(v);
    }
  }
  return model;
}

namespace
{

void put_u32(std::string & buf, std::uint32_t v)
{
  char b[4];
  std::memcpy(b, &v, 4);
  buf.append(b, 4);
}

void put_f32(std::string & buf, double v)
{
  const auto f = static_cast<float>(v);
  char b[4];
  std::memcpy(b, &f, 4);
  buf.append(b, 4);
}

class Reader
{
public:
  Reader(const std::vector<char> & bytes, std::string path) : bytes_(bytes), path_(std::move(path)) {}

  template <typename T>
  T get()
  {
    if (pos_ + sizeof(T) > bytes_.size()) {
      throw FormatError(path_ + ": truncated model file");
    }
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  bool done() const { return pos_ == bytes_.size(); }

private:
  const std::vector<char> & bytes_;
  std::string path_;
  std::size_t pos_{0};
};

}  // namespace

void save_model(const PlaceabilityModel & model, const std::filesystem::path & path)
{
  std::string buf(kMagic, 4);
  put_u32(buf, kFormatVersion);
  put_u32(buf, static_cast<std::uint32_t>(model.fourier_order));
  put_u32(buf, static_cast<std::uint32_t>(model.layers.size()));
  for (const std::size_t d : model.dims()) {
    put_u32(buf, static_cast<std::uint32_t>(d));
  }
  for (const DenseLayer & l : model.layers) {
    for (const double v : l.weight) {
      put_f32(buf, v);
    }
    for (const double v : l.bias) {
      put_f32(buf, v);
    }
  }
  auto out = detail::open_output(path, true);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  detail::finish_output(out, path);
}

PlaceabilityModel load_model(const std::filesystem::path & path)
{
  auto in = detail::open_input(path, true);
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(bytes, path.string());
  char magic[4];
  for (char & c : magic) {
    c = r.get<char>();
  }
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError(path.string() + ": not a placeability model (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kFormatVersion) {
    throw FormatError(path.string() + ": unsupported model version " + std::to_string(version));
  }
  PlaceabilityModel m;
  m.fourier_order = static_cast<int>(r.get<std::uint32_t>());
  const auto n_layers = r.get<std::uint32_t>();
  if (m.fourier_order < 1 || n_layers < 1 || n_layers > 64) {
    throw FormatError(path.string() + ": invalid model header");
  }
  std::vector<std::size_t> dims(n_layers + 1);
  for (std::size_t & d : dims) {
    d = r.get<std::uint32_t>();
    if (d == 0 || d > (1u << 16)) {
      throw FormatError(path.string() + ": invalid layer width");
    }
  }
  if (dims.front() != fourier_dim(m.fourier_order) || dims.back() != 1) {
    throw FormatError(path.string() + ": layer widths do not match the encoder and scalar head");
  }
  for (std::size_t k = 0; k < n_layers; ++k) {
    DenseLayer l;
    l.in = dims[k];
    l.out = dims[k + 1];
    l.weight.resize(l.in * l.out);
    l.bias.resize(l.out);
    for (double & v : l.weight) {
      v = r.get<float>();
    }
    for (double & v : l.bias) {
      v = r.get<float>();
    }
    m.layers.push_back(std::move(l));
  }
  if (!r.done()) {
    throw FormatError(path.string() + ": trailing bytes after model payload");
  }
  if (!m.finite()) {
    throw ValidationError(path.string() + ": model has non-finite parameters");
  }
  return m;
}

}  // namespace scenemix
