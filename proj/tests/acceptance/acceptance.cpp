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

// Acceptance runner. Prints one "criterion N: PASS|FAIL ..." line per
// criterion; `--criterion N` runs a single one. Exit status is non-zero when
// any criterion that ran failed.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "test_util.hpp"

namespace {

using namespace genesis;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Transformation invariants

std::string check_nonlinear(const Patch& x, const Patch& xt, const TransformRecord& r) {
  if (!is_normalized(xt.voxels)) return "non-linear output outside [0,1]";
  std::vector<std::size_t> order(x.voxels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x.voxels[a] < x.voxels[b]; });
  const bool increasing = r.nonlinear->params.direction == CurveDirection::increasing;
  for (std::size_t i = 1; i < order.size(); ++i) {
    const float prev = xt.voxels[order[i - 1]], cur = xt.voxels[order[i]];
    if (increasing ? cur < prev : cur > prev) return "non-linear curve does not preserve order";
  }
  return {};
}

std::string check_shuffle(const Patch& x, const Patch& xt) {
  std::vector<float> a = x.voxels, b = xt.voxels;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b ? std::string{} : "local shuffle changed the voxel multiset";
}

std::string check_outpaint(const Patch& x, const Patch& xt, const TransformRecord& r) {
  const PaintRecord& p = *r.paint;
  if (p.target != PaintTarget::exterior || p.fills.size() != 1) return "out-painting record malformed";
  const PaintMask mask = mask_from_windows(x.shape, p.windows, PaintTarget::exterior, p.dilations);
  const auto fill = static_cast<float>(p.fills[0]);
  std::size_t exterior = 0;
  for (std::size_t i = 0; i < x.voxels.size(); ++i) {
    if (mask.retained[i]) {
      if (std::bit_cast<std::uint32_t>(xt.voxels[i]) != std::bit_cast<std::uint32_t>(x.voxels[i])) {
        return "out-painting altered a retained voxel";
      }
    } else {
      ++exterior;
      if (xt.voxels[i] != fill) return "out-painting exterior voxel differs from the fill";
    }
  }
  const double frac = static_cast<double>(exterior) / static_cast<double>(x.voxels.size());
  if (!(frac < 0.25)) return fmt("out-painting exterior fraction %.4f >= 0.25", frac);
  return {};
}

std::string check_inpaint(const Patch& x, const Patch& xt, const TransformRecord& r) {
  const PaintRecord& p = *r.paint;
  if (p.target != PaintTarget::interior || p.windows.empty()) return "in-painting record malformed";
  std::vector<std::uint8_t> replaced(x.voxels.size(), 0);
  for (const Window& w : p.windows) {
    for (std::size_t z = w.offset[0]; z < w.offset[0] + w.extent[0]; ++z) {
      for (std::size_t y = w.offset[1]; y < w.offset[1] + w.extent[1]; ++y) {
        for (std::size_t c = w.offset[2]; c < w.offset[2] + w.extent[2]; ++c) replaced[x.offset(z, y, c)] = 1;
      }
    }
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < x.voxels.size(); ++i) {
    if (replaced[i]) {
      ++count;
    } else if (std::bit_cast<std::uint32_t>(xt.voxels[i]) != std::bit_cast<std::uint32_t>(x.voxels[i])) {
      return "in-painting altered a voxel outside its windows";
    }
  }
  const double frac = static_cast<double>(count) / static_cast<double>(x.voxels.size());
  if (frac > 0.25) return fmt("in-painting replaced fraction %.4f > 0.25", frac);
  return {};
}

Outcome criterion_invariants() {
  const auto t0 = Clock::now();
  const SchemeConfig config;
  const std::array<std::pair<const char*, SchemeSelection>, 4> cases{{
      {"NL", {true, false, PaintChoice::none}},
      {"LS", {false, true, PaintChoice::none}},
      {"OP", {false, false, PaintChoice::out}},
      {"IP", {false, false, PaintChoice::in}},
  }};
  std::size_t checked = 0;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const auto& [name, sel] = cases[c];
    RngState rng = derive_stream({1000 + c, 0, StreamTag::crop});
    for (std::uint64_t i = 0; i < 1000; ++i) {
      const Patch x = testing::random_patch(testing::random_shape(rng, 16, 64), rng);
      const auto [xt, r] = transform(x, sel, config, 42 + c, i);
      std::string err;
      if (xt.shape != x.shape) err = "shape changed";
      if (err.empty() && !is_normalized(xt.voxels)) err = "output outside [0,1]";
      if (err.empty()) {
        if (c == 0) err = check_nonlinear(x, xt, r);
        if (c == 1) err = check_shuffle(x, xt);
        if (c == 2) err = check_outpaint(x, xt, r);
        if (c == 3) err = check_inpaint(x, xt, r);
      }
      if (!err.empty()) return {false, fmt("%s patch %llu: %s", name, static_cast<unsigned long long>(i), err.c_str())};
      ++checked;
    }
  }
  RngState draws = derive_stream({7, 0, StreamTag::scheme});
  for (int i = 0; i < 100000; ++i) {
    const SchemeSelection s = draw_scheme(config, draws);
    const std::string label = s.label();
    if (label.find("OP") != std::string::npos && label.find("IP") != std::string::npos) {
      return {false, "out- and in-painting co-occurred in draw " + std::to_string(i)};
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 60.0) return {false, fmt("%zu patches checked but runtime %.1f s >= 60 s", checked, secs)};
  return {true, fmt("%zu patches, 100000 scheme draws, %.1f s", checked, secs)};
}

// ---------------------------------------------------------------------------
// 2. Bezier correctness

Outcome criterion_bezier() {
  const IntensityLUT lut = bezier_lut(make_bezier(CurveDirection::increasing, {0.25, 0.25}, {0.75, 0.75}));
  RngState rng = derive_stream({2, 0, StreamTag::nonlinear});
  double worst = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    const double v = uniform(rng, 0.0, 1.0);
    worst = std::max(worst, std::abs(lut(v) - v));
  }
  const Point2 mid = bezier_point(make_bezier(CurveDirection::increasing, {0.0, 1.0}, {1.0, 0.0}), 0.5);
  // Direct evaluation of the Bernstein form at t = 1/2: weights 1/8, 3/8, 3/8, 1/8.
  const double ox = 0.125 * 0.0 + 0.375 * 0.0 + 0.375 * 1.0 + 0.125 * 1.0;
  const double oy = 0.125 * 0.0 + 0.375 * 1.0 + 0.375 * 0.0 + 0.125 * 1.0;
  const double mid_err = std::max({std::abs(mid.x - 0.5), std::abs(mid.y - 0.5), std::abs(ox - 0.5), std::abs(oy - 0.5)});
  const bool pass = worst < 1e-6 && mid_err <= 1e-12;
  return {pass, fmt("identity max |out-in| = %.3g over 1e6 values; B(0.5) = (%.17g, %.17g)", worst, mid.x, mid.y)};
}

// ---------------------------------------------------------------------------
// 3. Determinism through the command-line tool

int run_cli(const std::string& args) {
  const std::string cmd = "'" GENESIS_CLI_PATH "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion_determinism() {
  testing::TempDir dir("genesis_acceptance");
  std::ofstream(dir / "run.json") << R"({"master_seed": 20240601, "samples": 100, "scheme": {"preset": "unified"},
    "patch": {"min": [16, 16, 16], "max": [32, 32, 32]},
    "sources": {"phantoms": {"count": 6, "dims": [40, 40, 40], "seed": 5}}})";
  const std::string config = "'" + (dir / "run.json").string() + "'";
  auto out = [&](const char* name) { return "'" + (dir / name).string() + "'"; };
  const int rc1 = run_cli("generate --threads 1 --config " + config + " --out " + out("run1"));
  const int rc2 = run_cli("generate --threads 1 --config " + config + " --out " + out("run2"));
  const int rc8 = run_cli("generate --threads 8 --config " + config + " --out " + out("run8"));
  if (rc1 != 0 || rc2 != 0 || rc8 != 0) return {false, fmt("generate exited with %d/%d/%d", rc1, rc2, rc8)};
  const auto t1 = testing::tree_contents(dir / "run1");
  const bool same_runs = t1 == testing::tree_contents(dir / "run2");
  const bool same_threads = t1 == testing::tree_contents(dir / "run8");
  const int verify_rc = run_cli("replay-verify --dir " + out("run1"));
  const VerificationReport report = verify_manifest(dir / "run1");
  const bool pass = same_runs && same_threads && verify_rc == 0 && report.all_passed() && report.samples.size() == 100;
  return {pass, fmt("%zu files; repeat %s, threads 1 vs 8 %s; replay-verify %zu/%zu", t1.size(),
                    same_runs ? "identical" : "DIFFER", same_threads ? "identical" : "DIFFER", report.passed(),
                    report.samples.size())};
}

// ---------------------------------------------------------------------------
// 4. Scheme distribution

Outcome criterion_distribution() {
  const SchemeConfig config;
  const auto expected = scheme_probabilities(config);
  const int n = 100000;
  std::array<double, 12> observed{};
  for (int i = 0; i < n; ++i) {
    RngState rng = derive_stream({4, static_cast<std::uint64_t>(i), StreamTag::scheme});
    observed[scheme_index(draw_scheme(config, rng))] += 1.0;
  }
  double stat = 0.0;
  std::size_t cells = 0;
  for (std::size_t k = 0; k < 12; ++k) {
    if (expected[k] == 0.0) continue;
    stat += std::pow(observed[k] - n * expected[k], 2) / (n * expected[k]);
    ++cells;
  }
  boost::math::chi_squared dist(static_cast<double>(cells - 1));
  const double p = boost::math::cdf(boost::math::complement(dist, stat));
  return {p > 0.01, fmt("chi2 = %.3f, df = %zu, p = %.4f (alpha 0.01)", stat, cells - 1, p)};
}

// ---------------------------------------------------------------------------
// 5. Gradient exactness

Outcome criterion_gradient() {
  using restorer::Matrix;
  RngState rng = derive_stream({5, 0, StreamTag::nonlinear});
  const restorer::TinyRestorer m = restorer::init_model({}, rng);
  // Restoration-style batch: X~ is a painted/perturbed version of X.
  Matrix x(4096, 4), xt(4096, 4);
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      x(r, c) = uniform(rng, 0.0, 1.0);
      xt(r, c) = std::clamp(x(r, c) + uniform(rng, -0.2, 0.2), 0.0, 1.0);
    }
  }
  const restorer::GradientSet g = restorer::backward(m, xt, x);
  double worst = 0.0;
  int checked = 0, skipped = 0;
  while (checked < 100) {
    const auto flat = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(m.parameter_count()) - 1));
    const auto fd = testing::central_difference(m, flat, xt, x, 1e-5);
    if (!fd) {
      ++skipped;  // the perturbation touches a kink
      continue;
    }
    worst = std::max(worst, testing::relative_error(*fd, restorer::parameter_ref(g.layers, flat)));
    ++checked;
  }
  return {worst < 1e-4, fmt("max relative error %.3g over %d parameters (%d skipped at kinks)", worst, checked, skipped)};
}

// ---------------------------------------------------------------------------
// 6 and 7. Desk-scale restoration pretraining

experiments::PretrainSetup desk_setup(std::uint64_t seed) {
  experiments::PretrainSetup s;
  s.seed = seed;
  s.volume_dims = restorer::kModelPatch;
  s.pairs = 2000;
  s.heldout_pairs = 200;
  s.scheme = SchemeConfig::preset("unified");
  s.train.steps = 1000;
  return s;
}

Outcome criterion_learnability() {
  const auto t0 = Clock::now();
  const auto r = experiments::pretrain(desk_setup(1));
  const double secs = seconds_since(t0);
  const double ratio = r.trained_heldout_l1 / r.untrained_heldout_l1;
  const bool pass = ratio <= 0.5 && secs < 300.0 && r.history.losses.size() <= 5000;
  return {pass, fmt("held-out L1 %.4f -> %.4f (ratio %.3f) after %zu steps, %.1f s", r.untrained_heldout_l1,
                    r.trained_heldout_l1, ratio, r.history.losses.size(), secs)};
}

Outcome criterion_transfer() {
  int wins = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto model = experiments::pretrain(desk_setup(seed)).trained;
    const auto r = experiments::compare_probes(model, {seed, 50, 100, {}});
    wins += r.pretrained.auc > r.fresh.auc;
    per_seed += fmt(" %llu:%.3f/%.3f", static_cast<unsigned long long>(seed), r.pretrained.auc, r.fresh.auc);
  }
  return {wins >= 8, fmt("pretrained probe wins %d/10 (seed:pretrained/fresh AUC%s)", wins, per_seed.c_str())};
}

// ---------------------------------------------------------------------------
// 8. Metric oracles

Outcome criterion_metrics() {
  RngState rng = derive_stream({8, 0, StreamTag::crop});
  int auc_mismatch = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto n = static_cast<std::size_t>(uniform_int(rng, 2, 12));
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = t % 2 == 0 ? static_cast<double>(uniform_int(rng, 0, 3)) : uniform(rng, 0.0, 1.0);
      y[i] = static_cast<int>(uniform_int(rng, 0, 1));
    }
    // Both classes present: one forced positive, one forced negative.
    const auto pos = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(n) - 1));
    const auto neg = (pos + static_cast<std::size_t>(uniform_int(rng, 1, static_cast<std::int64_t>(n) - 1))) % n;
    y[pos] = 1;
    y[neg] = 0;
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (y[i] != 1 || y[j] != 0) continue;
        pairs += 1.0;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
    }
    auc_mismatch += metrics::auc(s, y) != wins / pairs;
  }
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto n = static_cast<std::size_t>(uniform_int(rng, 1, 512));
    std::vector<std::uint8_t> a(n), b(n);
    const double pa = uniform(rng, 0.0, 1.0), pb = uniform(rng, 0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = uniform(rng, 0.0, 1.0) < pa;
      b[i] = uniform(rng, 0.0, 1.0) < pb;
    }
    const double j = metrics::iou(a, b);
    worst = std::max(worst, std::abs(metrics::dice(a, b) - 2.0 * j / (1.0 + j)));
  }
  return {auc_mismatch == 0 && worst <= 1e-12,
          fmt("AUC mismatches %d/1000; max |dice - 2iou/(1+iou)| = %.3g over 1000 pairs", auc_mismatch, worst)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::array<std::function<Outcome()>, 8> criteria{criterion_invariants, criterion_bezier,
                                                          criterion_determinism, criterion_distribution,
                                                          criterion_gradient, criterion_learnability,
                                                          criterion_transfer, criterion_metrics};
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: genesis_acceptance [--criterion N]\n";
      return 2;
    }
  }
  if (only < 0 || only > 8) {
    std::cerr << "criterion must be 1..8\n";
    return 2;
  }
  bool all = true;
  for (int n = 1; n <= 8; ++n) {
    if (only != 0 && n != only) continue;
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(n - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
    all &= o.pass;
  }
  return all ? 0 : 1;
}
