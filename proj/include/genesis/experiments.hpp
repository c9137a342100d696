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

// Desk-scale experiments on synthetic phantoms: pre-train the restorer on
// generated (X, X~) pairs, then compare linear probes on its encoder and on
// a freshly initialized one.

#include <cstdint>
#include <string>
#include <vector>

#include "genesis/dataset.hpp"
#include "genesis/restorer.hpp"
#include "genesis/rng.hpp"
#include "genesis/scheme.hpp"
#include "genesis/volume.hpp"

namespace genesis::experiments {

using restorer::Architecture;
using restorer::TrainConfig;

/// Phantom sources: kinds cycle through `kinds`; phantom i draws from its own
/// stream keyed by (seed, i).
inline std::vector<SourceVolume> phantom_sources(std::size_t count, const Shape3& dims,
                                                 const std::vector<PhantomKind>& kinds, std::uint64_t seed,
                                                 const std::string& prefix = "phantom") {
  if (kinds.empty()) throw Error(Errc::config, "at least one phantom kind is required");
  std::vector<SourceVolume> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    RngState rng = derive_stream({seed, i, StreamTag::crop});
    const PhantomKind kind = kinds[i % kinds.size()];
    out.push_back({prefix + "_" + std::to_string(i) + "_" + to_string(kind), make_phantom(kind, dims, rng).volume});
  }
  return out;
}

/// Center-cropped X~ as inputs, X as targets.
inline restorer::TrainingSet to_training_set(const std::vector<SamplePair>& pairs,
                                             const Shape3& model_patch = restorer::kModelPatch) {
  restorer::TrainingSet set;
  const auto rows = static_cast<Eigen::Index>(model_patch.count());
  set.inputs.resize(rows, static_cast<Eigen::Index>(pairs.size()));
  set.targets.resize(rows, static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    set.inputs.col(static_cast<Eigen::Index>(i)) = restorer::center_crop(pairs[i].xt, model_patch);
    set.targets.col(static_cast<Eigen::Index>(i)) = restorer::center_crop(pairs[i].x, model_patch);
  }
  return set;
}

struct PretrainSetup {
  std::uint64_t seed = 1;
  std::size_t source_volumes = 64;
  Shape3 volume_dims{24, 24, 24};
  std::vector<PhantomKind> kinds{PhantomKind::sphere, PhantomKind::cube, PhantomKind::gradient, PhantomKind::blobs};
  std::size_t pairs = 2000;
  std::size_t heldout_pairs = 200;
  SchemeConfig scheme;
  Architecture arch;
  TrainConfig train;
  std::size_t threads = 1;
};

struct PretrainResult {
  restorer::TinyRestorer initial;
  restorer::TinyRestorer trained;
  restorer::TrainHistory history;
  double untrained_heldout_l1 = 0.0;
  double trained_heldout_l1 = 0.0;
};

/// Training pairs come from one set of phantoms, held-out pairs from a
/// disjoint set; the model is then trained and both L1s are measured.
inline PretrainResult pretrain(const PretrainSetup& s) {
  const Shape3& patch = restorer::kModelPatch;
  if (s.arch.input != patch.count()) throw Error(Errc::config, "architecture input must equal the 16^3 model patch");
  GenerateOptions gen{s.scheme, SizeRange::fixed(patch), s.pairs, s.seed, s.threads};
  const auto train_sources = phantom_sources(s.source_volumes, s.volume_dims, s.kinds, mix64(s.seed), "train");
  const auto train_set = to_training_set(generate_pairs_in_memory(train_sources, gen));

  const std::size_t heldout_volumes = std::max<std::size_t>(4, s.source_volumes / 4);
  const auto heldout_sources = phantom_sources(heldout_volumes, s.volume_dims, s.kinds, mix64(s.seed + 1), "heldout");
  gen.n = s.heldout_pairs;
  gen.master_seed = mix64(s.seed + 2);
  const auto heldout_set = to_training_set(generate_pairs_in_memory(heldout_sources, gen));

  RngState init_rng = derive_stream({s.seed, 0, StreamTag::nonlinear});
  RngState batch_rng = derive_stream({s.seed, 0, StreamTag::shuffle});
  PretrainResult r;
  r.initial = restorer::init_model(s.arch, init_rng);
  r.untrained_heldout_l1 = restorer::evaluate_l1(r.initial, heldout_set);
  auto [trained, history] = restorer::train(r.initial, train_set, s.train, batch_rng);
  r.trained = std::move(trained);
  r.history = std::move(history);
  r.trained_heldout_l1 = restorer::evaluate_l1(r.trained, heldout_set);
  return r;
}

/// Balanced sphere-vs-cube set (label 1 = sphere) of 16^3 phantoms.
inline restorer::LabeledSet shape_probe_set(std::size_t per_class, std::uint64_t seed) {
  restorer::LabeledSet set;
  const Shape3& dims = restorer::kModelPatch;
  set.inputs.resize(static_cast<Eigen::Index>(dims.count()), static_cast<Eigen::Index>(2 * per_class));
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    RngState rng = derive_stream({seed, i, StreamTag::crop});
    const bool sphere = i % 2 == 0;
    const Phantom ph = make_phantom(sphere ? PhantomKind::sphere : PhantomKind::cube, dims, rng);
    for (std::size_t v = 0; v < dims.count(); ++v) {
      set.inputs(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(i)) = ph.volume.voxels[v];
    }
    set.labels.push_back(sphere ? 1 : 0);
  }
  return set;
}

struct TransferSetup {
  std::uint64_t seed = 1;
  std::size_t train_per_class = 50;
  std::size_t test_per_class = 100;
  restorer::ProbeConfig probe;
};

struct TransferResult {
  restorer::ProbeResult pretrained;
  restorer::ProbeResult fresh;
};

/// Probes `pretrained` and a freshly initialized restorer of the same
/// architecture on the same sphere-vs-cube split.
inline TransferResult compare_probes(const restorer::TinyRestorer& pretrained, const TransferSetup& s) {
  const auto train = shape_probe_set(s.train_per_class, mix64(s.seed + 10));
  const auto test = shape_probe_set(s.test_per_class, mix64(s.seed + 11));
  RngState fresh_rng = derive_stream({mix64(s.seed + 12), 0, StreamTag::nonlinear});
  const auto fresh = restorer::init_model(pretrained.arch, fresh_rng);
  TransferResult r;
  r.pretrained = restorer::linear_probe(restorer::extract_encoder(pretrained), train, test, s.probe);
  r.fresh = restorer::linear_probe(restorer::extract_encoder(fresh), train, test, s.probe);
  return r;
}

}  // namespace genesis::experiments
