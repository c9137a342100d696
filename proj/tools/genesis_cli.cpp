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

// genesis: command-line front end for the transformation-pair engine.
//
// Exit codes: 0 ok, 2 config or argument error, 3 I/O or format error,
// 4 verification failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "genesis/genesis.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

using namespace genesis;

struct Globals {
  bool json = false;
  std::size_t threads = 0;  // 0: GENESIS_THREADS or 1
};

std::size_t resolve_threads(std::size_t flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("GENESIS_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw Error(Errc::config, std::string("GENESIS_THREADS must be a positive integer, got '") + env + "'");
  }
  return 1;
}

void emit(const Globals& g, const ojson& j, const std::string& text) {
  if (g.json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << text;
  }
}

Shape3 parse_dims(const std::vector<std::size_t>& v) {
  if (v.size() == 2) return {1, v[0], v[1]};
  if (v.size() == 3) return {v[0], v[1], v[2]};
  throw Error(Errc::config, "dims must have 2 or 3 entries");
}

ojson volume_stats(const std::vector<float>& v) {
  double lo = v.empty() ? 0.0 : v[0], hi = lo, sum = 0.0;
  for (float f : v) {
    lo = std::min<double>(lo, f);
    hi = std::max<double>(hi, f);
    sum += f;
  }
  return {{"min", lo}, {"max", hi}, {"mean", v.empty() ? 0.0 : sum / static_cast<double>(v.size())}};
}

// ---------------------------------------------------------------------------

int cmd_convert(const Globals& g, const fs::path& raw, const fs::path& header, const fs::path& out,
                const std::string& normalize) {
  const std::string bytes = genesis::detail::read_file(raw);
  const auto h = json_util::parse(genesis::detail::read_file(header), header.string());
  Volume v = volume_from_raw(std::span(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()), h);
  if (normalize == "ct") {
    v = normalize_ct(v);
  } else if (normalize == "minmax") {
    v = normalize_minmax(v);
  }
  write_gvol(v, out);
  ojson j{{"command", "convert"},
          {"out", out.string()},
          {"dims", json_util::to_json<ojson>(v.dims)},
          {"normalize", normalize},
          {"checksum", hex64(fnv1a64(v.voxels))}};
  emit(g, j, "wrote " + out.string() + "\n");
  return 0;
}

int cmd_phantom(const Globals& g, const std::string& kind, const std::vector<std::size_t>& dims, std::uint64_t seed,
                const fs::path& out) {
  RngState rng = derive_stream({seed, 0, StreamTag::crop});
  const Phantom ph = make_phantom(phantom_kind_from_string(kind), parse_dims(dims), rng);
  write_gvol(ph.volume, out);
  ojson j{{"command", "phantom"},
          {"out", out.string()},
          {"kind", to_string(ph.kind)},
          {"dims", json_util::to_json<ojson>(ph.volume.dims)},
          {"center", ph.center},
          {"radius", ph.radius},
          {"checksum", hex64(fnv1a64(ph.volume.voxels))}};
  emit(g, j, "wrote " + out.string() + " (" + to_string(ph.kind) + ")\n");
  return 0;
}

int cmd_generate(const Globals& g, const fs::path& config, const fs::path& out, bool overwrite) {
  const RunConfig c = load_run_config(config);
  const auto sources = load_sources(c);
  GenerateOptions opts{c.scheme, size_range_for(c, sources), c.samples, c.master_seed, resolve_threads(g.threads)};
  const Manifest m = generate_pairs(sources, opts, out, overwrite);
  std::array<std::size_t, 12> counts{};
  for (const auto& r : m.records) ++counts[scheme_index(r.selection)];
  ojson freq = ojson::object();
  for (std::size_t i = 0; i < 12; ++i) freq[enumerate_schemes()[i]] = counts[i];
  ojson j{{"command", "generate"}, {"out", out.string()}, {"n", m.records.size()}, {"scheme_counts", freq}};
  emit(g, j, "wrote " + std::to_string(m.records.size()) + " pairs to " + out.string() + "\n");
  return 0;
}

int cmd_replay_verify(const Globals& g, const fs::path& dir) {
  const VerificationReport report = verify_manifest(dir);
  ojson j = to_json(report);
  j["command"] = "replay-verify";
  std::string text = std::to_string(report.passed()) + "/" + std::to_string(report.samples.size()) + " samples verified\n";
  for (const auto& s : report.samples) {
    if (!s.ok) text += "  sample " + std::to_string(s.index) + ": " + s.message + "\n";
  }
  emit(g, j, text);
  return report.all_passed() ? 0 : exit_code_for(ErrorCategory::verification);
}

int cmd_train_demo(const Globals& g, const fs::path& config, const fs::path& out) {
  RunConfig c = load_run_config(config);
  c.train.threads = resolve_threads(g.threads);
  const auto r = experiments::pretrain(c.train);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(Errc::io, "cannot create " + out.string() + ": " + ec.message());
  restorer::save_model(r.trained, out / "model.gmdl");
  genesis::detail::write_file(out / "history.csv", restorer::history_csv(r.history));
  ojson j{{"command", "train-demo"},
          {"steps", r.history.losses.size()},
          {"untrained_heldout_l1", r.untrained_heldout_l1},
          {"trained_heldout_l1", r.trained_heldout_l1},
          {"ratio", r.trained_heldout_l1 / r.untrained_heldout_l1},
          {"final_loss", r.history.losses.empty() ? 0.0 : r.history.losses.back()},
          {"checkpoint", (out / "model.gmdl").string()}};
  genesis::detail::write_file(out / "summary.json", j.dump(2) + "\n");
  char buf[160];
  std::snprintf(buf, sizeof buf, "held-out L1 %.4f -> %.4f (ratio %.3f)\n", r.untrained_heldout_l1,
                r.trained_heldout_l1, r.trained_heldout_l1 / r.untrained_heldout_l1);
  emit(g, j, buf);
  return 0;
}

int cmd_probe(const Globals& g, const fs::path& config, const fs::path& out) {
  RunConfig c = load_run_config(config);
  c.train.threads = resolve_threads(g.threads);
  std::optional<restorer::TinyRestorer> fixed;
  if (c.probe.checkpoint) fixed = restorer::load_model(*c.probe.checkpoint);

  ojson runs = ojson::array();
  std::size_t wins = 0;
  std::string text;
  for (std::size_t s = 0; s < c.probe.seeds; ++s) {
    const std::uint64_t seed = c.master_seed + s;
    restorer::TinyRestorer model;
    if (fixed) {
      model = *fixed;
    } else {
      experiments::PretrainSetup setup = c.train;
      setup.seed = seed;
      model = experiments::pretrain(setup).trained;
    }
    experiments::TransferSetup ts{seed, c.probe.train_per_class, c.probe.test_per_class, c.probe.config};
    const auto r = experiments::compare_probes(model, ts);
    wins += r.pretrained.auc > r.fresh.auc;
    runs.push_back({{"seed", seed},
                    {"pretrained_auc", r.pretrained.auc},
                    {"fresh_auc", r.fresh.auc},
                    {"pretrained_accuracy", r.pretrained.accuracy},
                    {"fresh_accuracy", r.fresh.accuracy}});
    char buf[160];
    std::snprintf(buf, sizeof buf, "seed %llu: pretrained AUC %.4f, fresh AUC %.4f\n",
                  static_cast<unsigned long long>(seed), r.pretrained.auc, r.fresh.auc);
    text += buf;
  }
  ojson j{{"command", "probe"}, {"seeds", c.probe.seeds}, {"pretrained_wins", wins}, {"runs", runs}};
  if (!out.empty()) genesis::detail::write_file(out, j.dump(2) + "\n");
  text += "pretrained encoder wins " + std::to_string(wins) + "/" + std::to_string(c.probe.seeds) + "\n";
  emit(g, j, text);
  return 0;
}

int cmd_eval(const Globals& g, const fs::path& pred_path, const fs::path& truth_path,
             const std::vector<std::string>& names, const std::string& format) {
  const Volume pred = read_gvol(pred_path);
  const Volume truth = read_gvol(truth_path);
  if (pred.dims != truth.dims) throw Error(Errc::shape_mismatch, "prediction and truth dims differ");
  auto binarize = [](const std::vector<float>& v) {
    std::vector<std::uint8_t> m(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) m[i] = v[i] >= 0.5f;
    return m;
  };
  std::vector<metrics::MetricReport> reports;
  for (const std::string& name : names) {
    const std::size_t n = pred.voxels.size();
    if (name == "l1") {
      reports.push_back({name, metrics::l1(pred.voxels, truth.voxels), n, false});
    } else if (name == "mse") {
      reports.push_back({name, metrics::mse(pred.voxels, truth.voxels), n, false});
    } else if (name == "psnr") {
      reports.push_back(metrics::psnr(pred.voxels, truth.voxels));
    } else if (name == "iou") {
      reports.push_back({name, metrics::iou(binarize(pred.voxels), binarize(truth.voxels)), n, false});
    } else if (name == "dice") {
      reports.push_back({name, metrics::dice(binarize(pred.voxels), binarize(truth.voxels)), n, false});
    } else if (name == "auc") {
      reports.push_back({name, metrics::auc(pred.voxels, binarize(truth.voxels)), n, false});
    } else {
      throw Error(Errc::config, "unknown metric '" + name + "'");
    }
  }
  ojson arr = ojson::array();
  for (const auto& r : reports) arr.push_back(metrics::to_json(r));
  ojson j{{"command", "eval"}, {"metrics", arr}};
  std::string text;
  if (format == "csv") {
    text = "metric,value,support\n";
    for (const auto& r : reports) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "%s,%.17g,%zu\n", r.name.c_str(), r.value, r.support);
      text += buf;
    }
  } else {
    text = j.dump(2) + "\n";
  }
  emit(g, j, text);
  return 0;
}

int cmd_inspect(const Globals& g, const fs::path& dir, std::size_t index) {
  const Manifest m = load_manifest(dir);
  const SamplePair pair = read_pair(dir, index, m);
  std::array<std::size_t, 12> counts{};
  for (const auto& r : m.records) ++counts[scheme_index(r.selection)];
  ojson freq = ojson::object();
  for (std::size_t i = 0; i < 12; ++i) freq[enumerate_schemes()[i]] = counts[i];
  ojson j{{"command", "inspect"},
          {"record", to_json(pair.record)},
          {"x", volume_stats(pair.x.voxels)},
          {"xt", volume_stats(pair.xt.voxels)},
          {"l1_x_xt", metrics::l1(pair.x.voxels, pair.xt.voxels)},
          {"scheme_counts", freq}};
  emit(g, j, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic (X, X~) restoration-pair engine"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Globals g;
  app.add_flag("--json", g.json, "Print machine-readable JSON to stdout");
  app.add_option("--threads", g.threads, "Worker threads (default: GENESIS_THREADS or 1)")
      ->check(CLI::PositiveNumber);

  fs::path raw, header, out, config, dir, pred, truth;
  std::string normalize = "none", kind = "sphere", format = "json";
  std::vector<std::size_t> dims{64, 64, 64};
  std::vector<std::string> metric_names;
  std::uint64_t seed = 0;
  std::size_t index = 0;
  bool overwrite = false;

  auto* convert = app.add_subcommand("convert", "Wrap a raw little-endian f32 file as GVOL");
  convert->add_option("--raw", raw, "Raw f32le voxel file")->required();
  convert->add_option("--header", header, "JSON header with dims, spacing, modality")->required();
  convert->add_option("--out", out, "Output .gvol")->required();
  convert->add_option("--normalize", normalize, "none | ct | minmax")
      ->check(CLI::IsMember({"none", "ct", "minmax"}));

  auto* phantom = app.add_subcommand("phantom", "Write a synthetic phantom volume");
  phantom->add_option("--kind", kind, "sphere | cube | gradient | blobs");
  phantom->add_option("--dims", dims, "d h w (or h w for 2D)")->expected(2, 3);
  phantom->add_option("--seed", seed, "Phantom seed");
  phantom->add_option("--out", out, "Output .gvol")->required();

  auto* generate = app.add_subcommand("generate", "Generate a pair dataset from a run config");
  generate->add_option("--config", config, "Run config JSON")->required();
  generate->add_option("--out", out, "Output directory")->required();
  generate->add_flag("--overwrite", overwrite, "Replace an existing dataset directory");

  auto* verify = app.add_subcommand("replay-verify", "Replay every record of a dataset and compare");
  verify->add_option("--dir", dir, "Dataset directory")->required();

  auto* train = app.add_subcommand("train-demo", "Train the tiny restorer on phantom pairs");
  train->add_option("--config", config, "Run config JSON")->required();
  train->add_option("--out", out, "Output directory for checkpoint, history and summary")->required();

  auto* probe = app.add_subcommand("probe", "Linear probes on pretrained versus fresh encoders");
  probe->add_option("--config", config, "Run config JSON")->required();
  probe->add_option("--out", out, "Summary JSON path");

  auto* eval = app.add_subcommand("eval", "Compare a prediction volume to a truth volume");
  eval->add_option("--pred", pred, "Prediction .gvol")->required();
  eval->add_option("--truth", truth, "Truth .gvol (binarized at 0.5 for mask metrics)")->required();
  eval->add_option("--metric", metric_names, "l1 | mse | psnr | iou | dice | auc")->required();
  eval->add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}));

  auto* inspect = app.add_subcommand("inspect", "Dump a pair's record and dataset scheme counts");
  inspect->add_option("--dir", dir, "Dataset directory")->required();
  inspect->add_option("--index", index, "Sample index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code_for(ErrorCategory::argument);
  }

  try {
    if (*convert) return cmd_convert(g, raw, header, out, normalize);
    if (*phantom) return cmd_phantom(g, kind, dims, seed, out);
    if (*generate) return cmd_generate(g, config, out, overwrite);
    if (*verify) return cmd_replay_verify(g, dir);
    if (*train) return cmd_train_demo(g, config, out);
    if (*probe) return cmd_probe(g, config, out);
    if (*eval) return cmd_eval(g, pred, truth, metric_names, format);
    if (*inspect) return cmd_inspect(g, dir, index);
  } catch (const Error& e) {
    std::cerr << "genesis: [" << to_string(e.category()) << "] " << e.what() << "\n";
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    std::cerr << "genesis: [io] " << e.what() << "\n";
    return exit_code_for(ErrorCategory::io);
  }
  return 0;
}
