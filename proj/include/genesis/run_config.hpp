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

// Run configuration shared by the command-line tools. Everything that affects
// an output lives here; flags only carry paths, verbosity and thread counts.
//
//   {
//     "master_seed": 7,
//     "scheme":  { "preset": "unified", ... },
//     "patch":   { "min": [32, 32, 32], "max": [64, 64, 64] },
//     "sources": { "volumes": ["a.gvol"],
//                  "phantoms": { "count": 8, "dims": [64, 64, 64],
//                                "kinds": ["sphere", "cube"], "seed": 3 } },
//     "samples": 100,
//     "train":   { "source_volumes": 64, "volume_dims": [16, 16, 16],
//                  "pairs": 2000, "heldout_pairs": 200,
//                  "steps": 1000, "lr": 1.0, "momentum": 0.9, "batch": 16 },
//     "probe":   { "seeds": 10, "train_per_class": 50, "test_per_class": 100,
//                  "steps": 500, "lr": 0.5, "l2": 0.001, "checkpoint": null }
//   }
//
// Every section is optional; unknown keys anywhere are rejected. Relative
// paths resolve against the directory holding the config file.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "genesis/dataset.hpp"
#include "genesis/error.hpp"
#include "genesis/experiments.hpp"
#include "genesis/json_util.hpp"
#include "genesis/patch.hpp"
#include "genesis/scheme.hpp"
#include "genesis/volume.hpp"

namespace genesis {

struct PhantomSpec {
  std::size_t count = 0;
  Shape3 dims{64, 64, 64};
  std::vector<PhantomKind> kinds{PhantomKind::sphere, PhantomKind::cube, PhantomKind::gradient, PhantomKind::blobs};
  std::uint64_t seed = 0;
};

struct ProbeSettings {
  std::size_t seeds = 10;
  std::size_t train_per_class = 50;
  std::size_t test_per_class = 100;
  restorer::ProbeConfig config;
  std::optional<std::filesystem::path> checkpoint;
};

struct RunConfig {
  std::uint64_t master_seed = 0;
  SchemeConfig scheme;
  std::optional<SizeRange> patch;
  std::vector<std::filesystem::path> volumes;
  PhantomSpec phantoms;
  std::size_t samples = 100;
  experiments::PretrainSetup train;
  ProbeSettings probe;
};

namespace detail {

inline std::size_t size_value(const nlohmann::json& j, const char* key, const std::string& where) {
  return static_cast<std::size_t>(json_util::unsigned_int(json_util::require(j, key, where), where + "." + key));
}

inline std::size_t positive(const nlohmann::json& j, const char* key, const std::string& where) {
  const std::size_t v = size_value(j, key, where);
  if (v == 0) throw Error(Errc::config, where + "." + key + " must be positive");
  return v;
}

inline std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

inline std::vector<PhantomKind> kinds_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw Error(Errc::config, where + " must be a non-empty array of kinds");
  std::vector<PhantomKind> kinds;
  for (const auto& k : j) kinds.push_back(phantom_kind_from_string(json_util::string(k, where)));
  return kinds;
}

}  // namespace detail

/// Parses a run config. `base` is the directory relative paths resolve to.
inline RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base = {}) {
  namespace ju = json_util;
  using detail::positive;
  using detail::size_value;
  ju::check_keys(j, {"master_seed", "scheme", "patch", "sources", "samples", "train", "probe"}, "config");
  RunConfig c;
  if (j.contains("master_seed")) c.master_seed = ju::unsigned_int(j["master_seed"], "master_seed");
  if (j.contains("scheme")) c.scheme = scheme_config_from_json(j["scheme"]);
  if (j.contains("patch")) {
    const auto& p = j["patch"];
    ju::check_keys(p, {"min", "max"}, "patch");
    SizeRange r;
    r.min = ju::shape3(ju::require(p, "min", "patch"), "patch.min");
    r.max = p.contains("max") ? ju::shape3(p["max"], "patch.max") : r.min;
    for (std::size_t a = 0; a < 3; ++a) {
      if (r.min[a] > r.max[a]) throw Error(Errc::config, "patch.min must not exceed patch.max");
    }
    c.patch = r;
  }
  if (j.contains("sources")) {
    const auto& s = j["sources"];
    ju::check_keys(s, {"volumes", "phantoms"}, "sources");
    if (s.contains("volumes")) {
      if (!s["volumes"].is_array()) throw Error(Errc::config, "sources.volumes must be an array of paths");
      for (const auto& v : s["volumes"]) c.volumes.push_back(detail::resolve(ju::string(v, "sources.volumes"), base));
    }
    if (s.contains("phantoms")) {
      const auto& p = s["phantoms"];
      const std::string where = "sources.phantoms";
      ju::check_keys(p, {"count", "dims", "kinds", "seed"}, where);
      c.phantoms.count = size_value(p, "count", where);
      if (p.contains("dims")) c.phantoms.dims = ju::shape3(p["dims"], where + ".dims");
      if (p.contains("kinds")) c.phantoms.kinds = detail::kinds_from_json(p["kinds"], where + ".kinds");
      if (p.contains("seed")) c.phantoms.seed = ju::unsigned_int(p["seed"], where + ".seed");
    }
  }
  if (j.contains("samples")) c.samples = positive(j, "samples", "config");

  c.train.seed = c.master_seed;
  c.train.scheme = c.scheme;
  c.train.volume_dims = restorer::kModelPatch;
  c.train.train.steps = 1000;
  if (j.contains("train")) {
    const auto& t = j["train"];
    const std::string where = "train";
    ju::check_keys(t, {"source_volumes", "volume_dims", "kinds", "pairs", "heldout_pairs", "steps", "lr", "momentum",
                       "batch"},
                   where);
    if (t.contains("source_volumes")) c.train.source_volumes = positive(t, "source_volumes", where);
    if (t.contains("volume_dims")) c.train.volume_dims = ju::shape3(t["volume_dims"], where + ".volume_dims");
    if (t.contains("kinds")) c.train.kinds = detail::kinds_from_json(t["kinds"], where + ".kinds");
    if (t.contains("pairs")) c.train.pairs = positive(t, "pairs", where);
    if (t.contains("heldout_pairs")) c.train.heldout_pairs = positive(t, "heldout_pairs", where);
    if (t.contains("steps")) c.train.train.steps = size_value(t, "steps", where);
    if (t.contains("lr")) c.train.train.lr = ju::number(t["lr"], where + ".lr");
    if (t.contains("momentum")) c.train.train.momentum = ju::probability(t["momentum"], where + ".momentum");
    if (t.contains("batch")) c.train.train.batch = positive(t, "batch", where);
    if (!(c.train.train.lr >= 0.0)) throw Error(Errc::config, "train.lr must be non-negative");
  }
  if (j.contains("probe")) {
    const auto& p = j["probe"];
    const std::string where = "probe";
    ju::check_keys(p, {"seeds", "train_per_class", "test_per_class", "steps", "lr", "l2", "checkpoint"}, where);
    if (p.contains("seeds")) c.probe.seeds = positive(p, "seeds", where);
    if (p.contains("train_per_class")) c.probe.train_per_class = positive(p, "train_per_class", where);
    if (p.contains("test_per_class")) c.probe.test_per_class = positive(p, "test_per_class", where);
    if (p.contains("steps")) c.probe.config.steps = size_value(p, "steps", where);
    if (p.contains("lr")) c.probe.config.lr = ju::number(p["lr"], where + ".lr");
    if (p.contains("l2")) c.probe.config.l2 = ju::number(p["l2"], where + ".l2");
    if (p.contains("checkpoint") && !p["checkpoint"].is_null()) {
      c.probe.checkpoint = detail::resolve(ju::string(p["checkpoint"], where + ".checkpoint"), base);
    }
  }
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  const std::string text = genesis::detail::read_file(path);
  return run_config_from_json(json_util::parse(text, path.string()), path.parent_path());
}

/// Loads the listed volumes (ids from file stems) and appends the phantoms.
inline std::vector<SourceVolume> load_sources(const RunConfig& c) {
  std::vector<SourceVolume> out;
  for (const auto& p : c.volumes) out.push_back({p.stem().string(), read_gvol(p)});
  if (c.phantoms.count > 0) {
    auto ph = experiments::phantom_sources(c.phantoms.count, c.phantoms.dims, c.phantoms.kinds, c.phantoms.seed);
    for (auto& s : ph) out.push_back(std::move(s));
  }
  if (out.empty()) throw Error(Errc::config, "config lists no source volumes or phantoms");
  return out;
}

/// The configured size range, or the default range for the smallest source.
inline SizeRange size_range_for(const RunConfig& c, const std::vector<SourceVolume>& sources) {
  if (c.patch) return *c.patch;
  Shape3 smallest = sources.front().volume.dims;
  for (const auto& s : sources) {
    for (std::size_t a = 0; a < 3; ++a) smallest[a] = std::min(smallest[a], s.volume.dims[a]);
  }
  return SizeRange::defaults_for(smallest);
}

}  // namespace genesis
