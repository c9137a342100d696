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

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "genesis/restorer.hpp"
#include "test_util.hpp"

namespace genesis::restorer {
namespace {

using genesis::testing::TempDir;

const Architecture kSmall{64, 32, 8};

Matrix random_batch(std::size_t rows, std::size_t cols, RngState& rng) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = uniform(rng, 0.0, 1.0);
  }
  return m;
}

Errc error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::invalid_argument;
}

TEST(Restorer, InitIsSeededGlorotWithZeroBias) {
  RngState a{7}, b{7}, c{8};
  const TinyRestorer ma = init_model({}, a);
  const TinyRestorer mb = init_model({}, b);
  const TinyRestorer mc = init_model({}, c);
  EXPECT_EQ(encode_checkpoint(ma), encode_checkpoint(mb));
  EXPECT_NE(encode_checkpoint(ma), encode_checkpoint(mc));
  EXPECT_EQ(ma.parameter_count(), 4096u * 256 + 256 + 256 * 64 + 64 + 64 * 256 + 256 + 256 * 4096 + 4096);
  const auto shapes = ma.arch.layer_shapes();
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& l = ma.layers[i];
    EXPECT_EQ(static_cast<std::size_t>(l.weight.rows()), shapes[i].first);
    EXPECT_EQ(static_cast<std::size_t>(l.weight.cols()), shapes[i].second);
    EXPECT_TRUE(l.bias.isZero(0.0));
    const double bound = std::sqrt(6.0 / static_cast<double>(shapes[i].first + shapes[i].second));
    EXPECT_LE(l.weight.cwiseAbs().maxCoeff(), bound);
    EXPECT_GT(l.weight.cwiseAbs().maxCoeff(), 0.9 * bound);
    EXPECT_NEAR(l.weight.mean(), 0.0, 0.05 * bound);
  }
}

TEST(Restorer, ZeroWeightsGiveHalf) {
  RngState rng{1};
  TinyRestorer m = init_model(kSmall, rng);
  for (auto& l : m.layers) l.weight.setZero();
  const Vector out = forward(m, Vector(random_batch(64, 1, rng).col(0)));
  EXPECT_EQ(out.size(), 64);
  EXPECT_TRUE(out.isApproxToConstant(0.5, 0.0));
}

TEST(Restorer, OutputInOpenUnitInterval) {
  RngState rng{2};
  const TinyRestorer m = init_model({}, rng);
  const Matrix out = forward(m, random_batch(4096, 3, rng));
  EXPECT_EQ(out.rows(), 4096);
  EXPECT_EQ(out.cols(), 3);
  EXPECT_GT(out.minCoeff(), 0.0);
  EXPECT_LT(out.maxCoeff(), 1.0);
  EXPECT_EQ(error_of([&] { forward(m, random_batch(100, 1, rng)); }), Errc::shape_mismatch);
}

TEST(Restorer, L1Examples) {
  const std::vector<double> a{0.0, 0.5, 1.0}, b{1.0, 0.5, 0.0};
  EXPECT_DOUBLE_EQ(l1_loss(a, b), 2.0 / 3.0);
  EXPECT_EQ(l1_loss(a, a), 0.0);
  const std::vector<double> pa{1.0, 0.0, 0.5}, pb{0.0, 1.0, 0.5};
  EXPECT_DOUBLE_EQ(l1_loss(pa, pb), l1_loss(a, b));
  EXPECT_EQ(error_of([&] { l1_loss(a, std::vector<double>{1.0}); }), Errc::shape_mismatch);
}

TEST(Restorer, GradientMatchesFiniteDifferences) {
  RngState rng{3};
  const TinyRestorer m = init_model({}, rng);
  const Matrix xt = random_batch(4096, 2, rng);
  const Matrix x = random_batch(4096, 2, rng);
  const GradientSet g = backward(m, xt, x);
  int checked = 0, skipped = 0;
  while (checked < 100) {
    const auto flat = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(m.parameter_count()) - 1));
    const auto fd = genesis::testing::central_difference(m, flat, xt, x);
    if (!fd) {
      ++skipped;
      continue;
    }
    const double an = parameter_ref(g.layers, flat);
    EXPECT_LT(genesis::testing::relative_error(*fd, an), 1e-4) << "parameter " << flat << " analytic " << an
                                                              << " numeric " << *fd;
    ++checked;
  }
  EXPECT_LT(skipped, 10);
}

TEST(Restorer, LossReturnedWithGradient) {
  RngState rng{4};
  const TinyRestorer m = init_model(kSmall, rng);
  const Matrix xt = random_batch(64, 5, rng), x = random_batch(64, 5, rng);
  EXPECT_DOUBLE_EQ(backward_with_loss(m, xt, x).second, l1_loss(forward(m, xt), x));
  EXPECT_EQ(error_of([&] { backward(m, xt, random_batch(64, 4, rng)); }), Errc::shape_mismatch);
}

TEST(Restorer, DeadNetworkHasZeroWeightGradientUpstream) {
  RngState rng{5};
  TinyRestorer m = init_model(kSmall, rng);
  m.layers[0].weight.setZero();  // every first-layer unit is dead
  const GradientSet g = backward(m, random_batch(64, 3, rng), random_batch(64, 3, rng));
  EXPECT_TRUE(g.layers[0].weight.isZero(0.0));
  EXPECT_TRUE(g.layers[0].bias.isZero(0.0));
  EXPECT_TRUE(g.layers[1].weight.isZero(0.0));
}

TEST(Restorer, ZeroLearningRateKeepsWeights) {
  RngState rng{6};
  const TinyRestorer m = init_model(kSmall, rng);
  const Matrix x = random_batch(64, 10, rng);
  RngState train_rng{1};
  const auto [trained, history] = train(m, {x, x}, {25, 0.0, 0.9, 4}, train_rng);
  EXPECT_EQ(encode_checkpoint(trained), encode_checkpoint(m));
  EXPECT_EQ(history.losses.size(), 25u);
}

TEST(Restorer, TrainingIsDeterministic) {
  RngState rng{6};
  const TinyRestorer m = init_model(kSmall, rng);
  const Matrix x = random_batch(64, 10, rng);
  RngState r1{9}, r2{9};
  const auto a = train(m, {x, x}, {40, 1.0, 0.9, 4}, r1);
  const auto b = train(m, {x, x}, {40, 1.0, 0.9, 4}, r2);
  EXPECT_EQ(encode_checkpoint(a.first), encode_checkpoint(b.first));
  EXPECT_EQ(a.second.losses, b.second.losses);
  EXPECT_EQ(history_csv(a.second), history_csv(b.second));
  EXPECT_EQ(history_csv(a.second).substr(0, 10), "step,loss\n");
}

TEST(Restorer, IdentityPairsLossDecreases) {
  int decreased = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RngState rng{seed};
    const TinyRestorer m = init_model(kSmall, rng);
    const Matrix x = random_batch(64, 32, rng);
    const auto [trained, history] = train(m, {x, x}, {300, 1.0, 0.9, 8}, rng);
    decreased += evaluate_l1(trained, {x, x}) < evaluate_l1(m, {x, x});
  }
  EXPECT_GE(decreased, 10);  // at least 95% of 10 runs
}

TEST(Restorer, TrainingErrors) {
  RngState rng{6};
  const TinyRestorer m = init_model(kSmall, rng);
  EXPECT_EQ(error_of([&] { train(m, {Matrix(64, 0), Matrix(64, 0)}, {}, rng); }), Errc::invalid_argument);
  const Matrix x = random_batch(64, 3, rng);
  EXPECT_EQ(error_of([&] { train(m, {x, random_batch(64, 2, rng)}, {}, rng); }), Errc::shape_mismatch);
  EXPECT_EQ(error_of([&] { train(m, {x, x}, {1, 1.0, 0.9, 0}, rng); }), Errc::invalid_argument);
}

TEST(Encoder, MatchesFirstTwoLayers) {
  RngState rng{10};
  const TinyRestorer m = init_model({}, rng);
  const Encoder enc = extract_encoder(m);
  EXPECT_EQ(enc.feature_size(), 64u);
  const Matrix x = random_batch(4096, 4, rng);
  const Matrix f = enc(x);
  EXPECT_EQ(f.rows(), 64);
  EXPECT_EQ(f, forward_trace(m, x).post[1]);
  // A single column goes through a matrix-vector kernel with its own summation order.
  EXPECT_TRUE(enc(Vector(x.col(2))).isApprox(f.col(2), 1e-12));
}

TEST(Probe, RandomFeaturesNearChance) {
  RngState rng{11};
  const Matrix train_f = random_batch(10, 100, rng), test_f = random_batch(10, 200, rng);
  std::vector<int> train_l(100), test_l(200);
  for (std::size_t i = 0; i < 100; ++i) train_l[i] = static_cast<int>(i % 2);
  for (std::size_t i = 0; i < 200; ++i) test_l[i] = static_cast<int>(i % 2);
  const ProbeResult r = probe_features(train_f, train_l, test_f, test_l, {});
  EXPECT_GE(r.auc, 0.35);
  EXPECT_LE(r.auc, 0.65);
  EXPECT_EQ(r.test_size, 200u);
}

TEST(Probe, SeparableFeaturesClassifiedPerfectly) {
  RngState rng{12};
  auto make = [&](std::size_t n, std::vector<int>& labels) {
    Matrix f = random_batch(5, n, rng);
    labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = static_cast<int>(i % 2);
      f(0, static_cast<Eigen::Index>(i)) += labels[i] == 1 ? 2.0 : -2.0;
    }
    return f;
  };
  std::vector<int> train_l, test_l;
  const Matrix train_f = make(60, train_l), test_f = make(80, test_l);
  const ProbeResult r = probe_features(train_f, train_l, test_f, test_l, {});
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.auc, 1.0);
  const ProbeResult again = probe_features(train_f, train_l, test_f, test_l, {});
  EXPECT_EQ(again.auc, r.auc);
  EXPECT_EQ(again.accuracy, r.accuracy);
}

TEST(Probe, LabelErrors) {
  RngState rng{13};
  const TinyRestorer m = init_model(kSmall, rng);
  const Encoder enc(m);
  const LabeledSet ok{random_batch(64, 4, rng), {0, 1, 0, 1}};
  const LabeledSet single{random_batch(64, 3, rng), {1, 1, 1}};
  const LabeledSet bad{random_batch(64, 2, rng), {0, 2}};
  const LabeledSet short_labels{random_batch(64, 2, rng), {0}};
  EXPECT_EQ(error_of([&] { linear_probe(enc, single, ok); }), Errc::single_class);
  EXPECT_EQ(error_of([&] { linear_probe(enc, ok, single); }), Errc::single_class);
  EXPECT_EQ(error_of([&] { linear_probe(enc, bad, ok); }), Errc::invalid_argument);
  EXPECT_EQ(error_of([&] { linear_probe(enc, short_labels, ok); }), Errc::shape_mismatch);
  EXPECT_NO_THROW(linear_probe(enc, ok, ok));
}

TEST(Checkpoint, RoundTrip) {
  RngState rng{14};
  const TinyRestorer m = init_model(kSmall, rng);
  const std::string bytes = encode_checkpoint(m);
  EXPECT_EQ(bytes.substr(0, 4), "GMDL");
  TempDir dir;
  save_model(m, dir / "m.gmdl");
  const TinyRestorer back = load_model(dir / "m.gmdl");
  EXPECT_EQ(back.arch, m.arch);
  EXPECT_EQ(encode_checkpoint(back), bytes);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(back.layers[i].weight, m.layers[i].weight);
}

TEST(Checkpoint, CorruptionDetected) {
  RngState rng{14};
  const std::string bytes = encode_checkpoint(init_model(kSmall, rng));
  auto decode = [](const std::string& s) {
    decode_checkpoint({reinterpret_cast<const unsigned char*>(s.data()), s.size()});
  };
  std::string magic = bytes;
  magic[0] = 'X';
  EXPECT_EQ(error_of([&] { decode(magic); }), Errc::bad_magic);
  std::string version = bytes;
  version[4] = 2;
  EXPECT_EQ(error_of([&] { decode(version); }), Errc::version_mismatch);
  EXPECT_EQ(error_of([&] { decode(bytes.substr(0, bytes.size() - 8)); }), Errc::truncated);
  std::string nan = bytes;
  const double q = std::numeric_limits<double>::quiet_NaN();
  std::memcpy(nan.data() + nan.size() - 8, &q, 8);
  EXPECT_EQ(error_of([&] { decode(nan); }), Errc::non_finite);
}

TEST(CenterCrop, TakesCentralBlock) {
  Patch p;
  p.shape = {18, 20, 17};
  p.voxels.resize(p.shape.count());
  std::iota(p.voxels.begin(), p.voxels.end(), 0.0f);
  const Vector v = center_crop(p);
  ASSERT_EQ(v.size(), 4096);
  EXPECT_EQ(v(0), p.voxels[p.offset(1, 2, 0)]);
  EXPECT_EQ(v(4095), p.voxels[p.offset(16, 17, 15)]);
  p.shape = {15, 20, 20};
  p.voxels.resize(p.shape.count());
  EXPECT_EQ(error_of([&] { center_crop(p); }), Errc::shape_mismatch);
}

}  // namespace
}  // namespace genesis::restorer
