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

#include <fstream>

#include <gtest/gtest.h>

#include "genesis/run_config.hpp"
#include "test_util.hpp"

namespace genesis {
namespace {

using nlohmann::json;
using testing::TempDir;

Errc error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::invalid_argument;
}

TEST(RunConfig, Defaults) {
  const RunConfig c = run_config_from_json(json::object());
  EXPECT_EQ(c.master_seed, 0u);
  EXPECT_EQ(c.samples, 100u);
  EXPECT_FALSE(c.patch.has_value());
  EXPECT_TRUE(c.volumes.empty());
  EXPECT_EQ(c.phantoms.count, 0u);
  EXPECT_EQ(c.train.volume_dims, (Shape3{16, 16, 16}));
  EXPECT_EQ(c.train.train.steps, 1000u);
  EXPECT_EQ(c.train.pairs, 2000u);
  EXPECT_EQ(c.probe.seeds, 10u);
  EXPECT_EQ(c.probe.train_per_class, 50u);
  EXPECT_EQ(c.probe.test_per_class, 100u);
  EXPECT_FALSE(c.probe.checkpoint.has_value());
}

TEST(RunConfig, FullDocument) {
  const RunConfig c = run_config_from_json(json::parse(R"({
    "master_seed": 7,
    "scheme": {"preset": "painting"},
    "patch": {"min": [8, 8, 8], "max": [12, 16, 20]},
    "sources": {"volumes": ["a.gvol", "/abs/b.gvol"],
                "phantoms": {"count": 3, "dims": [20, 20, 20], "kinds": ["cube"], "seed": 5}},
    "samples": 12,
    "train": {"source_volumes": 8, "volume_dims": [18, 18, 18], "kinds": ["sphere", "blobs"], "pairs": 50,
              "heldout_pairs": 10, "steps": 20, "lr": 0.5, "momentum": 0.8, "batch": 4},
    "probe": {"seeds": 2, "train_per_class": 5, "test_per_class": 6, "steps": 30, "lr": 0.1, "l2": 0.0,
              "checkpoint": "model.gmdl"}
  })"),
                                           "/base");
  EXPECT_EQ(c.master_seed, 7u);
  EXPECT_EQ(c.scheme.p_paint, 1.0);
  ASSERT_TRUE(c.patch.has_value());
  EXPECT_EQ(c.patch->max, (Shape3{12, 16, 20}));
  ASSERT_EQ(c.volumes.size(), 2u);
  EXPECT_EQ(c.volumes[0], std::filesystem::path("/base/a.gvol"));
  EXPECT_EQ(c.volumes[1], std::filesystem::path("/abs/b.gvol"));
  EXPECT_EQ(c.phantoms.count, 3u);
  EXPECT_EQ(c.phantoms.kinds, std::vector<PhantomKind>{PhantomKind::cube});
  EXPECT_EQ(c.samples, 12u);
  EXPECT_EQ(c.train.seed, 7u);
  EXPECT_EQ(c.train.scheme.p_paint, 1.0);
  EXPECT_EQ(c.train.volume_dims, (Shape3{18, 18, 18}));
  EXPECT_EQ(c.train.train.batch, 4u);
  EXPECT_EQ(c.train.train.momentum, 0.8);
  EXPECT_EQ(c.probe.config.steps, 30u);
  EXPECT_EQ(c.probe.config.l2, 0.0);
  EXPECT_EQ(*c.probe.checkpoint, std::filesystem::path("/base/model.gmdl"));
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
  for (const char* doc : {R"({"seed": 1})", R"({"patch": {"min": [8, 8, 8], "size": 3}})",
                          R"({"patch": {"min": [9, 8, 8], "max": [8, 8, 8]}})", R"({"sources": {"files": []}})",
                          R"({"sources": {"volumes": "a.gvol"}})", R"({"sources": {"phantoms": {"dims": [8, 8, 8]}}})",
                          R"({"sources": {"phantoms": {"count": 1, "kinds": ["torus"]}}})", R"({"samples": 0})",
                          R"({"train": {"epochs": 3}})", R"({"train": {"lr": -1}})", R"({"probe": {"seeds": 0}})",
                          R"({"master_seed": -4})", R"({"scheme": {"p_paint": 3}})"}) {
    EXPECT_EQ(error_of([&] { run_config_from_json(json::parse(doc)); }), Errc::config) << doc;
  }
}

TEST(RunConfig, LoadResolvesRelativeToConfigFile) {
  TempDir dir;
  const auto sources = genesis::testing::small_sources(1, 3, 12);
  write_gvol(sources[0].volume, dir / "ct_a.gvol");
  { std::ofstream(dir / "run.json") << R"({"sources": {"volumes": ["ct_a.gvol"], "phantoms": {"count": 2, "dims": [10, 10, 10]}}})"; }
  const RunConfig c = load_run_config(dir / "run.json");
  ASSERT_EQ(c.volumes.size(), 1u);
  EXPECT_EQ(c.volumes[0], dir / "ct_a.gvol");
  const auto loaded = load_sources(c);
  ASSERT_EQ(loaded.size(), 3u);
  EXPECT_EQ(loaded[0].id, "ct_a");
  EXPECT_EQ(loaded[0].volume.voxels, sources[0].volume.voxels);
  EXPECT_EQ(loaded[1].volume.dims, (Shape3{10, 10, 10}));
  const SizeRange r = size_range_for(c, loaded);
  EXPECT_EQ(r.min, SizeRange::defaults_for({10, 10, 10}).min);
  EXPECT_EQ(r.max, SizeRange::defaults_for({10, 10, 10}).max);
}

TEST(RunConfig, NoSourcesIsAConfigError) {
  EXPECT_EQ(error_of([] { load_sources(RunConfig{}); }), Errc::config);
}

TEST(RunConfig, MissingFileIsIoError) {
  TempDir dir;
  EXPECT_EQ(error_of([&] { load_run_config(dir / "absent.json"); }), Errc::io);
  { std::ofstream(dir / "broken.json") << "{"; }
  EXPECT_EQ(error_of([&] { load_run_config(dir / "broken.json"); }), Errc::config);
}

}  // namespace
}  // namespace genesis
