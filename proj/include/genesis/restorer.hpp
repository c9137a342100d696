// Copyright 2026 The Genesis Authors. All Rights Reserved.
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

#pragma once

// A small fully-connected encoder-decoder trained to restore X from X~ under
// a mean L1 loss, with hand-written backpropagation.
//
//   input --affine--> hidden --ReLU--> affine --> code --ReLU-->      (encoder)
//         --affine--> hidden --ReLU--> affine --> input --logistic--> (decoder)
//
// Parameters are f64. Batches are stored column-wise (one sample per column).

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "genesis/error.hpp"
#include "genesis/metrics.hpp"
#include "genesis/patch.hpp"
#include "genesis/rng.hpp"
#include "genesis/volume.hpp"

namespace genesis::restorer {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Architecture {
  std::size_t input = 4096;  // a flattened 16^3 patch
  std::size_t hidden = 256;
  std::size_t code = 64;

  /// Layer shapes as (fan_out, fan_in): encoder 1, encoder 2, decoder 1, decoder 2.
  std::array<std::pair<std::size_t, std::size_t>, 4> layer_shapes() const {
    return {{{hidden, input}, {code, hidden}, {hidden, code}, {input, hidden}}};
  }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

inline constexpr Shape3 kModelPatch{16, 16, 16};

/// Inputs in [0,1] are shifted by this offset before the first layer.
inline constexpr double kInputOffset = 0.5;

inline void validate(const Architecture& a) {
  if (a.input == 0 || a.hidden == 0 || a.code == 0) throw Error(Errc::invalid_dims, "layer widths must be positive");
}

struct DenseLayer {
  Matrix weight;  // (fan_out, fan_in)
  Vector bias;
};

struct TinyRestorer {
  Architecture arch;
  std::array<DenseLayer, 4> layers;

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
  }
};

/// Same layout as the model: one gradient tensor per weight and bias.
struct GradientSet {
  std::array<DenseLayer, 4> layers;
};

/// Flat parameter addressing: layer by layer, weights row-major then bias.
template <class Layers>
auto& parameter_ref(Layers& layers, std::size_t flat) {
  for (auto& l : layers) {
    const auto nw = static_cast<std::size_t>(l.weight.size());
    if (flat < nw) {
      const auto cols = static_cast<std::size_t>(l.weight.cols());
      return l.weight(static_cast<Eigen::Index>(flat / cols), static_cast<Eigen::Index>(flat % cols));
    }
    flat -= nw;
    if (flat < static_cast<std::size_t>(l.bias.size())) return l.bias(static_cast<Eigen::Index>(flat));
    flat -= static_cast<std::size_t>(l.bias.size());
  }
  throw Error(Errc::out_of_range, "parameter index out of range");
}

/// Weights ~ U(-sqrt(6/(fan_in+fan_out)), +sqrt(...)) drawn row-major, layer by
/// layer; biases zero.
inline TinyRestorer init_model(const Architecture& arch, RngState& rng) {
  validate(arch);
  TinyRestorer m;
  m.arch = arch;
  const auto shapes = arch.layer_shapes();
  for (std::size_t i = 0; i < 4; ++i) {
    const auto [out, in] = shapes[i];
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    auto& l = m.layers[i];
    l.weight.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = uniform(rng, -bound, bound);
    }
    l.bias = Vector::Zero(static_cast<Eigen::Index>(out));
  }
  return m;
}

inline void check_input(const TinyRestorer& m, const Matrix& x) {
  if (static_cast<std::size_t>(x.rows()) != m.arch.input) {
    throw Error(Errc::shape_mismatch, "input length " + std::to_string(x.rows()) + " does not match architecture input " +
                                          std::to_string(m.arch.input));
  }
}

/// Pre- and post-activations of every layer, kept for backpropagation.
struct Activations {
  std::array<Matrix, 4> pre;
  std::array<Matrix, 4> post;  // post[3] is the restored batch
};

inline Matrix logistic(const Matrix& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

inline Activations forward_trace(const TinyRestorer& m, const Matrix& x) {
  check_input(m, x);
  Activations a;
  const Matrix centered = (x.array() - kInputOffset).matrix();
  const Matrix* in = &centered;
  for (std::size_t i = 0; i < 4; ++i) {
    a.pre[i].noalias() = m.layers[i].weight * *in;
    a.pre[i].colwise() += m.layers[i].bias;
    a.post[i] = i == 3 ? logistic(a.pre[i]) : Matrix(a.pre[i].cwiseMax(0.0));
    in = &a.post[i];
  }
  return a;
}

/// Restores a batch (one sample per column). Output lies in (0,1).
inline Matrix forward(const TinyRestorer& m, const Matrix& x) { return forward_trace(m, x).post[3]; }

inline Vector forward(const TinyRestorer& m, const Vector& x) {
  return forward(m, Matrix(x)).col(0);
}

/// Mean absolute difference.
inline double l1_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw Error(Errc::shape_mismatch, "l1_loss: length mismatch");
  return metrics::l1(pred, target);
}

inline double l1_loss(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw Error(Errc::shape_mismatch, "l1_loss: shape mismatch");
  }
  return (pred - target).cwiseAbs().mean();
}

/// Gradient of the batch-mean L1 loss. d|e|/de = sign(e) with sign(0) = 0;
/// ReLU'(0) = 0. Returns the loss alongside.
inline std::pair<GradientSet, double> backward_with_loss(const TinyRestorer& m, const Matrix& x_tilde,
                                                         const Matrix& x) {
  if (x.rows() != x_tilde.rows() || x.cols() != x_tilde.cols()) {
    throw Error(Errc::shape_mismatch, "backward: input and target shapes differ");
  }
  const Activations a = forward_trace(m, x_tilde);
  const Matrix err = a.post[3] - x;
  const double loss = err.cwiseAbs().mean();
  const double scale = 1.0 / static_cast<double>(err.size());

  GradientSet g;
  Matrix delta = err.unaryExpr([scale](double e) { return e > 0.0 ? scale : (e < 0.0 ? -scale : 0.0); });
  delta = delta.cwiseProduct(a.post[3].cwiseProduct((1.0 - a.post[3].array()).matrix()));
  const Matrix centered = (x_tilde.array() - kInputOffset).matrix();
  for (std::size_t i = 4; i-- > 0;) {
    const Matrix& in = i == 0 ? centered : a.post[i - 1];
    g.layers[i].weight.noalias() = delta * in.transpose();
    g.layers[i].bias = delta.rowwise().sum();
    if (i == 0) break;
    Matrix back = m.layers[i].weight.transpose() * delta;
    delta = back.cwiseProduct((a.pre[i - 1].array() > 0.0).cast<double>().matrix());
  }
  return {std::move(g), loss};
}

inline GradientSet backward(const TinyRestorer& m, const Matrix& x_tilde, const Matrix& x) {
  return backward_with_loss(m, x_tilde, x).first;
}

// ---------------------------------------------------------------------------
// Encoder reuse

/// The first two layers of a restorer, frozen.
class Encoder {
 public:
  explicit Encoder(const TinyRestorer& m) : input_(m.arch.input), layers_{m.layers[0], m.layers[1]} {}

  std::size_t feature_size() const { return static_cast<std::size_t>(layers_[1].bias.size()); }

  /// Features for a batch (one sample per column).
  Matrix operator()(const Matrix& x) const {
    if (static_cast<std::size_t>(x.rows()) != input_) throw Error(Errc::shape_mismatch, "encoder input length mismatch");
    Matrix h = layers_[0].weight * (x.array() - kInputOffset).matrix();
    h.colwise() += layers_[0].bias;
    h = h.cwiseMax(0.0);
    Matrix z = layers_[1].weight * h;
    z.colwise() += layers_[1].bias;
    return z.cwiseMax(0.0);
  }

  Vector operator()(const Vector& x) const { return (*this)(Matrix(x)).col(0); }

 private:
  std::size_t input_;
  std::array<DenseLayer, 2> layers_;
};

inline Encoder extract_encoder(const TinyRestorer& m) { return Encoder(m); }

// ---------------------------------------------------------------------------
// Data

/// Center crop of a patch to `shape`, flattened to doubles.
inline Vector center_crop(const Patch& p, const Shape3& shape = kModelPatch) {
  for (std::size_t a = 0; a < 3; ++a) {
    if (p.shape[a] < shape[a]) throw Error(Errc::shape_mismatch, "patch is smaller than the model input");
  }
  Vector out(static_cast<Eigen::Index>(shape.count()));
  Eigen::Index i = 0;
  const Index3 off{(p.shape.d - shape.d) / 2, (p.shape.h - shape.h) / 2, (p.shape.w - shape.w) / 2};
  for (std::size_t z = 0; z < shape.d; ++z) {
    for (std::size_t y = 0; y < shape.h; ++y) {
      for (std::size_t x = 0; x < shape.w; ++x) out(i++) = p.voxels[p.offset(off[0] + z, off[1] + y, off[2] + x)];
    }
  }
  return out;
}

/// Paired model inputs (X~) and targets (X), one sample per column.
struct TrainingSet {
  Matrix inputs;
  Matrix targets;

  std::size_t size() const { return static_cast<std::size_t>(inputs.cols()); }
};

struct TrainConfig {
  std::size_t steps = 3000;
  double lr = 1.0;
  double momentum = 0.9;
  std::size_t batch = 16;
};

struct TrainHistory {
  std::vector<double> losses;
  TrainConfig config;
  std::uint64_t seed = 0;
};

/// Mini-batch SGD with momentum; batch columns drawn with replacement from
/// `rng`. Loss at step t is measured before that step's update.
inline std::pair<TinyRestorer, TrainHistory> train(TinyRestorer model, const TrainingSet& data,
                                                   const TrainConfig& cfg, RngState& rng) {
  if (data.size() == 0) throw Error(Errc::invalid_argument, "training set is empty");
  if (data.targets.cols() != data.inputs.cols() || data.targets.rows() != data.inputs.rows()) {
    throw Error(Errc::shape_mismatch, "training inputs and targets differ in shape");
  }
  check_input(model, data.inputs);
  if (cfg.batch == 0) throw Error(Errc::invalid_argument, "batch must be positive");

  TrainHistory history{{}, cfg, rng.state};
  history.losses.reserve(cfg.steps);
  std::array<DenseLayer, 4> velocity;
  for (std::size_t i = 0; i < 4; ++i) {
    velocity[i].weight = Matrix::Zero(model.layers[i].weight.rows(), model.layers[i].weight.cols());
    velocity[i].bias = Vector::Zero(model.layers[i].bias.size());
  }
  const auto rows = data.inputs.rows();
  Matrix xb(rows, static_cast<Eigen::Index>(cfg.batch));
  Matrix tb(rows, static_cast<Eigen::Index>(cfg.batch));
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    for (Eigen::Index b = 0; b < xb.cols(); ++b) {
      const auto j = static_cast<Eigen::Index>(uniform_int(rng, 0, static_cast<std::int64_t>(data.size()) - 1));
      xb.col(b) = data.inputs.col(j);
      tb.col(b) = data.targets.col(j);
    }
    auto [grad, loss] = backward_with_loss(model, xb, tb);
    history.losses.push_back(loss);
    if (cfg.lr == 0.0) continue;
    for (std::size_t i = 0; i < 4; ++i) {
      velocity[i].weight = cfg.momentum * velocity[i].weight - cfg.lr * grad.layers[i].weight;
      velocity[i].bias = cfg.momentum * velocity[i].bias - cfg.lr * grad.layers[i].bias;
      model.layers[i].weight += velocity[i].weight;
      model.layers[i].bias += velocity[i].bias;
    }
  }
  return {std::move(model), std::move(history)};
}

/// Mean L1 between the restored inputs and their targets.
inline double evaluate_l1(const TinyRestorer& m, const TrainingSet& data) {
  return l1_loss(forward(m, data.inputs), data.targets);
}

inline std::string history_csv(const TrainHistory& h) {
  std::string out = "step,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < h.losses.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, h.losses[i]);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Linear probe

struct LabeledSet {
  Matrix inputs;            // one sample per column
  std::vector<int> labels;  // 0 or 1
};

struct ProbeConfig {
  std::size_t steps = 500;
  double lr = 0.5;
  double l2 = 1e-3;
};

struct ProbeResult {
  double accuracy = 0.0;
  double auc = 0.5;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

namespace detail {

inline void check_labels(const LabeledSet& s, const char* what) {
  if (static_cast<std::size_t>(s.inputs.cols()) != s.labels.size()) {
    throw Error(Errc::shape_mismatch, std::string(what) + ": one label per sample is required");
  }
  bool has0 = false, has1 = false;
  for (int l : s.labels) {
    if (l != 0 && l != 1) throw Error(Errc::invalid_argument, "labels must be 0 or 1");
    has0 |= l == 0;
    has1 |= l == 1;
  }
  if (!has0 || !has1) throw Error(Errc::single_class, std::string(what) + " holds a single class");
}

}  // namespace detail

/// Logistic regression on fixed features, full-batch gradient descent from
/// zero weights. Features are standardized with training-set statistics.
inline ProbeResult probe_features(const Matrix& train_features, const std::vector<int>& train_labels,
                                  const Matrix& test_features, const std::vector<int>& test_labels,
                                  const ProbeConfig& cfg) {
  detail::check_labels({train_features, train_labels}, "probe training set");
  detail::check_labels({test_features, test_labels}, "probe test set");
  const Vector mean = train_features.rowwise().mean();
  Vector sd = ((train_features.colwise() - mean).array().square().rowwise().mean()).sqrt().matrix();
  sd = sd.unaryExpr([](double s) { return s > 1e-12 ? s : 1.0; });
  auto standardize = [&](const Matrix& f) -> Matrix {
    return ((f.colwise() - mean).array().colwise() / sd.array()).matrix();
  };
  const Matrix ftrain = standardize(train_features);
  const Matrix ftest = standardize(test_features);
  Vector y(static_cast<Eigen::Index>(train_labels.size()));
  for (std::size_t i = 0; i < train_labels.size(); ++i) y(static_cast<Eigen::Index>(i)) = train_labels[i];

  Vector w = Vector::Zero(ftrain.rows());
  double b = 0.0;
  const double n = static_cast<double>(ftrain.cols());
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    Vector z = (ftrain.transpose() * w).array() + b;
    const Vector p = (1.0 + (-z.array()).exp()).inverse().matrix();
    const Vector r = p - y;
    w -= cfg.lr * ((ftrain * r) / n + cfg.l2 * w);
    b -= cfg.lr * r.mean();
  }
  const Vector scores = (ftest.transpose() * w).array() + b;
  ProbeResult out;
  out.train_size = train_labels.size();
  out.test_size = test_labels.size();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test_labels.size(); ++i) {
    correct += static_cast<int>(scores(static_cast<Eigen::Index>(i)) > 0.0) == test_labels[i];
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(test_labels.size());
  out.auc = metrics::auc(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())), test_labels);
  return out;
}

/// Trains an affine+logistic classifier on frozen encoder features and
/// reports held-out accuracy and AUC.
inline ProbeResult linear_probe(const Encoder& encoder, const LabeledSet& train, const LabeledSet& test,
                                const ProbeConfig& cfg = {}) {
  detail::check_labels(train, "probe training set");
  detail::check_labels(test, "probe test set");
  return probe_features(encoder(train.inputs), train.labels, encoder(test.inputs), test.labels, cfg);
}

// ---------------------------------------------------------------------------
// Checkpoints
//
//   "GMDL" | version u32 = 1 | header_len u64 | JSON header | f64le tensors
//
// The header lists the architecture and the tensors in storage order
// (enc1.weight, enc1.bias, enc2.weight, ..., dec2.bias); weights are row-major.

inline constexpr std::array<const char*, 4> kLayerNames = {"enc1", "enc2", "dec1", "dec2"};

inline std::string encode_checkpoint(const TinyRestorer& m) {
  nlohmann::ordered_json header;
  header["arch"] = {{"input", m.arch.input}, {"hidden", m.arch.hidden}, {"code", m.arch.code}};
  header["dtype"] = "f64le";
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& l = m.layers[i];
    tensors.push_back({{"name", std::string(kLayerNames[i]) + ".weight"}, {"shape", {l.weight.rows(), l.weight.cols()}}});
    tensors.push_back({{"name", std::string(kLayerNames[i]) + ".bias"}, {"shape", {l.bias.size()}}});
  }
  header["tensors"] = tensors;
  const std::string body = header.dump();
  std::string out = "GMDL";
  genesis::detail::put_u32(out, 1);
  genesis::detail::put_u64(out, body.size());
  out += body;
  std::vector<double> flat;
  for (const auto& l : m.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) flat.push_back(l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) flat.push_back(l.bias(r));
  }
  genesis::detail::append_f64le(out, flat);
  return out;
}

inline TinyRestorer decode_checkpoint(std::span<const unsigned char> bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), "GMDL", 4) != 0) throw Error(Errc::bad_magic, "not a GMDL checkpoint");
  if (genesis::detail::get_u32(bytes.data() + 4) != 1) throw Error(Errc::version_mismatch, "unsupported GMDL version");
  const std::uint64_t len = genesis::detail::get_u64(bytes.data() + 8);
  if (len > bytes.size() - 16) throw Error(Errc::truncated, "checkpoint header extends past end of file");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(len));
    TinyRestorer m;
    m.arch.input = header.at("arch").at("input").get<std::size_t>();
    m.arch.hidden = header.at("arch").at("hidden").get<std::size_t>();
    m.arch.code = header.at("arch").at("code").get<std::size_t>();
    validate(m.arch);
    const auto shapes = m.arch.layer_shapes();
    std::size_t needed = 0;
    for (const auto& [o, i] : shapes) needed += o * i + o;
    if (bytes.size() - 16 - len != 8 * needed) throw Error(Errc::truncated, "checkpoint payload size mismatch");
    const unsigned char* p = bytes.data() + 16 + len;
    auto next = [&p] {
      const double v = std::bit_cast<double>(genesis::detail::get_u64(p));
      p += 8;
      if (!std::isfinite(v)) throw Error(Errc::non_finite, "checkpoint holds a non-finite parameter");
      return v;
    };
    for (std::size_t i = 0; i < 4; ++i) {
      auto& l = m.layers[i];
      l.weight.resize(static_cast<Eigen::Index>(shapes[i].first), static_cast<Eigen::Index>(shapes[i].second));
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
        for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = next();
      }
      l.bias.resize(static_cast<Eigen::Index>(shapes[i].first));
      for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = next();
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_header, std::string("malformed checkpoint header: ") + e.what());
  }
}

inline void save_model(const TinyRestorer& m, const std::filesystem::path& path) {
  genesis::detail::write_file(path, encode_checkpoint(m));
}

inline TinyRestorer load_model(const std::filesystem::path& path) {
  const std::string bytes = genesis::detail::read_file(path);
  return decode_checkpoint({reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()});
}

}  // namespace genesis::restorer
