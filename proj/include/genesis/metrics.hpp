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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ranges>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "genesis/error.hpp"

namespace genesis::metrics {

struct MetricReport {
  std::string name;
  double value = 0.0;
  std::size_t support = 0;
  bool infinite = false;  // PSNR of identical inputs
};

inline nlohmann::ordered_json to_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["value"] = r.infinite ? nlohmann::ordered_json("inf") : nlohmann::ordered_json(r.value);
  j["support"] = r.support;
  j["infinite"] = r.infinite;
  return j;
}

namespace detail {

template <class A, class B>
void check_sizes(const A& a, const B& b) {
  if (std::ranges::size(a) != std::ranges::size(b)) throw Error(Errc::shape_mismatch, "metric inputs differ in size");
  if (std::ranges::empty(a)) throw Error(Errc::shape_mismatch, "metric inputs are empty");
}

}  // namespace detail

/// Mean absolute difference.
template <std::ranges::sized_range A, std::ranges::sized_range B>
double l1(const A& a, const B& b) {
  detail::check_sizes(a, b);
  double sum = 0.0;
  auto ib = std::ranges::begin(b);
  for (auto va : a) sum += std::abs(static_cast<double>(va) - static_cast<double>(*ib++));
  return sum / static_cast<double>(std::ranges::size(a));
}

template <std::ranges::sized_range A, std::ranges::sized_range B>
double mse(const A& a, const B& b) {
  detail::check_sizes(a, b);
  double sum = 0.0;
  auto ib = std::ranges::begin(b);
  for (auto va : a) {
    const double d = static_cast<double>(va) - static_cast<double>(*ib++);
    sum += d * d;
  }
  return sum / static_cast<double>(std::ranges::size(a));
}

/// PSNR with peak 1.0. Identical inputs report `infinite`.
template <std::ranges::sized_range A, std::ranges::sized_range B>
MetricReport psnr(const A& a, const B& b) {
  const double m = mse(a, b);
  MetricReport r{"psnr", 0.0, static_cast<std::size_t>(std::ranges::size(a)), false};
  if (m == 0.0) {
    r.value = std::numeric_limits<double>::infinity();
    r.infinite = true;
  } else {
    r.value = -10.0 * std::log10(m);
  }
  return r;
}

struct Overlap {
  std::size_t intersection = 0;
  std::size_t pred = 0;
  std::size_t truth = 0;
};

template <std::ranges::sized_range A, std::ranges::sized_range B>
Overlap overlap(const A& pred, const B& truth) {
  if (std::ranges::size(pred) != std::ranges::size(truth)) {
    throw Error(Errc::shape_mismatch, "masks differ in size");
  }
  Overlap o;
  auto it = std::ranges::begin(truth);
  for (auto p : pred) {
    const bool a = static_cast<bool>(p);
    const bool b = static_cast<bool>(*it++);
    o.intersection += a && b;
    o.pred += a;
    o.truth += b;
  }
  return o;
}

/// |A & B| / |A | B|; two empty masks score 1.
template <std::ranges::sized_range A, std::ranges::sized_range B>
double iou(const A& pred, const B& truth) {
  const Overlap o = overlap(pred, truth);
  const std::size_t uni = o.pred + o.truth - o.intersection;
  return uni == 0 ? 1.0 : static_cast<double>(o.intersection) / static_cast<double>(uni);
}

/// 2|A & B| / (|A| + |B|); two empty masks score 1.
template <std::ranges::sized_range A, std::ranges::sized_range B>
double dice(const A& pred, const B& truth) {
  const Overlap o = overlap(pred, truth);
  const std::size_t denom = o.pred + o.truth;
  return denom == 0 ? 1.0 : 2.0 * static_cast<double>(o.intersection) / static_cast<double>(denom);
}

/// Mann-Whitney AUC via average ranks; tied scores count 1/2.
template <std::ranges::sized_range S, std::ranges::sized_range L>
double auc(const S& scores, const L& labels) {
  const auto n = static_cast<std::size_t>(std::ranges::size(scores));
  if (n != static_cast<std::size_t>(std::ranges::size(labels))) {
    throw Error(Errc::shape_mismatch, "scores and labels differ in size");
  }
  std::vector<double> s(std::ranges::begin(scores), std::ranges::end(scores));
  std::vector<int> y;
  y.reserve(n);
  for (auto l : labels) {
    const int v = static_cast<int>(l);
    if (v != 0 && v != 1) throw Error(Errc::invalid_argument, "labels must be 0 or 1");
    y.push_back(v);
  }
  const auto positives = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) throw Error(Errc::single_class, "AUC needs both classes");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });
  // Sum of (1-based, tie-averaged) ranks of the positives, kept doubled to stay integral.
  std::uint64_t doubled_rank_sum = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && s[order[j]] == s[order[i]]) ++j;
    const std::uint64_t doubled_rank = i + j + 1;  // 2 * mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (y[order[k]] == 1) doubled_rank_sum += doubled_rank;
    }
    i = j;
  }
  const double u = static_cast<double>(doubled_rank_sum) / 2.0 -
                   static_cast<double>(positives) * static_cast<double>(positives + 1) / 2.0;
  return u / (static_cast<double>(positives) * static_cast<double>(negatives));
}

}  // namespace genesis::metrics
