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

// (X, X~) pair datasets on disk.
//
// Layout of a dataset directory:
//
//   dataset.json         generation recipe: seed, scheme config, size range,
//                        source ids and checksums
//   manifest.jsonl       one TransformRecord per line, sample 0 first
//   sources/<id>.gvol    the normalized source volumes
//   X_<i>.gvol           restoration target of sample i
//   Xt_<i>.gvol          transformed input of sample i
//
// Sample i is a pure function of (sources, recipe, i): it draws the source
// volume and crop from its crop stream, its scheme from its scheme stream, and
// so on. Output bytes do not depend on the number of worker threads.

#include <algorithm>
#include <array>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "genesis/error.hpp"
#include "genesis/json_util.hpp"
#include "genesis/patch.hpp"
#include "genesis/rng.hpp"
#include "genesis/scheme.hpp"
#include "genesis/volume.hpp"

namespace genesis {

struct SourceVolume {
  std::string id;
  Volume volume;
};

struct SamplePair {
  Patch x;   // ground truth
  Patch xt;  // model input
  TransformRecord record;
};

struct GenerateOptions {
  SchemeConfig scheme;
  SizeRange size_range;
  std::size_t n = 1;
  std::uint64_t master_seed = 0;
  std::size_t threads = 1;
};

inline void validate_source_id(const std::string& id) {
  const bool ok = !id.empty() && id != "." && id != ".." && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
  if (!ok) throw Error(Errc::config, "source id '" + id + "' must match [A-Za-z0-9_.-]+");
}

inline void validate_sources(std::span<const SourceVolume> sources) {
  if (sources.empty()) throw Error(Errc::invalid_argument, "at least one source volume is required");
  std::vector<std::string> ids;
  for (const SourceVolume& s : sources) {
    validate_source_id(s.id);
    validate(s.volume);
    if (!is_normalized(s.volume.voxels)) {
      throw Error(Errc::not_normalized, "source '" + s.id + "' is not normalized to [0,1]");
    }
    ids.push_back(s.id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw Error(Errc::config, "duplicate source id");
}

/// Builds sample `index`: source and crop from the crop stream, then the
/// scheme and its parameters from their own streams.
inline SamplePair make_sample(std::span<const SourceVolume> sources, const SchemeConfig& scheme,
                              const SizeRange& size_range, std::uint64_t master_seed, std::uint64_t index) {
  RngState crop = derive_stream({master_seed, index, StreamTag::crop});
  const auto& src = sources[static_cast<std::size_t>(uniform_int(crop, 0, static_cast<std::int64_t>(sources.size()) - 1))];
  Patch x = sample_patch(src.volume, size_range, crop, src.id);
  auto [xt, record] = transform_sample(x, scheme, master_seed, index);
  return {std::move(x), std::move(xt), std::move(record)};
}

namespace detail {

/// Runs fn(i) for i in [0, n) on `threads` workers; rethrows the first error.
template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// In-memory generation; element i is sample i.
inline std::vector<SamplePair> generate_pairs_in_memory(std::span<const SourceVolume> sources,
                                                        const GenerateOptions& opts) {
  validate_sources(sources);
  validate(opts.scheme);
  std::vector<SamplePair> out(opts.n);
  detail::parallel_for(opts.n, opts.threads, [&](std::size_t i) {
    out[i] = make_sample(sources, opts.scheme, opts.size_range, opts.master_seed, i);
  });
  return out;
}

struct SourceEntry {
  std::string id;
  std::uint64_t checksum = 0;
};

struct Manifest {
  std::uint64_t master_seed = 0;
  SchemeConfig scheme;
  SizeRange size_range;
  std::vector<SourceEntry> sources;
  std::vector<TransformRecord> records;
};

inline std::string sample_file(const char* prefix, std::size_t index) {
  return std::string(prefix) + "_" + std::to_string(index) + ".gvol";
}

inline nlohmann::ordered_json recipe_json(const Manifest& m) {
  using oj = nlohmann::ordered_json;
  oj j;
  j["format"] = "genesis-dataset";
  j["version"] = 1;
  j["master_seed"] = m.master_seed;
  j["n"] = m.records.size();
  j["scheme"] = to_json(m.scheme);
  j["size_range"] = {{"min", json_util::to_json<oj>(m.size_range.min)},
                     {"max", json_util::to_json<oj>(m.size_range.max)}};
  oj sources = oj::array();
  for (const SourceEntry& s : m.sources) {
    sources.push_back({{"id", s.id}, {"file", "sources/" + s.id + ".gvol"}, {"checksum", hex64(s.checksum)}});
  }
  j["sources"] = sources;
  return j;
}

namespace detail {

inline bool dataset_file(const std::filesystem::path& p) {
  const std::string name = p.filename().string();
  if (name == "dataset.json" || name == "manifest.jsonl" || name == "sources") return true;
  return (name.starts_with("X_") || name.starts_with("Xt_")) && name.ends_with(".gvol");
}

inline void prepare_output_dir(const std::filesystem::path& dir, bool overwrite) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) throw Error(Errc::io, dir.string() + " exists and is not a directory");
    std::vector<fs::path> stale;
    for (const auto& entry : fs::directory_iterator(dir)) stale.push_back(entry.path());
    if (!stale.empty()) {
      if (!overwrite) throw Error(Errc::io, dir.string() + " is not empty");
      for (const auto& p : stale) {
        if (!dataset_file(p)) throw Error(Errc::io, "refusing to overwrite: " + p.string() + " is not a dataset file");
      }
      for (const auto& p : stale) fs::remove_all(p, ec);
    }
  }
  fs::create_directories(dir / "sources", ec);
  if (ec) throw Error(Errc::io, "cannot create " + (dir / "sources").string() + ": " + ec.message());
}

}  // namespace detail

/// Writes n pairs, the sources, the recipe and the manifest under `out_dir`.
///
/// `out_dir` must be absent or empty; with `overwrite`, an existing dataset
/// directory (containing only dataset files) is replaced.
inline Manifest generate_pairs(std::span<const SourceVolume> sources, const GenerateOptions& opts,
                               const std::filesystem::path& out_dir, bool overwrite = false) {
  validate_sources(sources);
  validate(opts.scheme);
  if (opts.n < 1) throw Error(Errc::invalid_argument, "n must be at least 1");
  detail::prepare_output_dir(out_dir, overwrite);

  Manifest m;
  m.master_seed = opts.master_seed;
  m.scheme = opts.scheme;
  m.size_range = opts.size_range;
  for (const SourceVolume& s : sources) {
    write_gvol(s.volume, out_dir / "sources" / (s.id + ".gvol"));
    m.sources.push_back({s.id, fnv1a64(s.volume.voxels)});
  }

  m.records.resize(opts.n);
  detail::parallel_for(opts.n, opts.threads, [&](std::size_t i) {
    SamplePair pair = make_sample(sources, opts.scheme, opts.size_range, opts.master_seed, i);
    const SourceVolume& src = *std::find_if(sources.begin(), sources.end(),
                                            [&](const SourceVolume& s) { return s.id == pair.record.source_id; });
    write_gvol(to_volume(pair.x, src.volume.modality, src.volume.spacing), out_dir / sample_file("X", i));
    write_gvol(to_volume(pair.xt, src.volume.modality, src.volume.spacing), out_dir / sample_file("Xt", i));
    m.records[i] = std::move(pair.record);
  });

  std::string lines;
  for (const TransformRecord& r : m.records) lines += to_json(r).dump() + "\n";
  detail::write_file(out_dir / "manifest.jsonl", lines);
  detail::write_file(out_dir / "dataset.json", recipe_json(m).dump(2) + "\n");
  return m;
}

/// Reads dataset.json and manifest.jsonl.
inline Manifest load_manifest(const std::filesystem::path& dir) {
  namespace ju = json_util;
  const auto recipe = ju::parse(detail::read_file(dir / "dataset.json"), "dataset.json");
  ju::check_keys(recipe, {"format", "version", "master_seed", "n", "scheme", "size_range", "sources"}, "dataset.json");
  if (recipe.value("format", "") != "genesis-dataset" || recipe.value("version", 0) != 1) {
    throw Error(Errc::config, "dataset.json: unsupported format");
  }
  Manifest m;
  m.master_seed = ju::unsigned_int(ju::require(recipe, "master_seed", "dataset.json"), "master_seed");
  m.scheme = scheme_config_from_json(ju::require(recipe, "scheme", "dataset.json"));
  const auto& range = ju::require(recipe, "size_range", "dataset.json");
  m.size_range.min = ju::shape3(ju::require(range, "min", "size_range"), "size_range.min");
  m.size_range.max = ju::shape3(ju::require(range, "max", "size_range"), "size_range.max");
  for (const auto& s : ju::require(recipe, "sources", "dataset.json")) {
    const std::string id = ju::string(ju::require(s, "id", "sources[]"), "sources[].id");
    validate_source_id(id);
    m.sources.push_back({id, detail::parse_hex64(ju::string(ju::require(s, "checksum", "sources[]"), "checksum"))});
  }
  const auto n = ju::unsigned_int(ju::require(recipe, "n", "dataset.json"), "n");

  std::istringstream lines(detail::read_file(dir / "manifest.jsonl"));
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    TransformRecord r = transform_record_from_json(ju::parse(line, "manifest line"));
    if (r.sample_index != m.records.size()) {
      throw Error(Errc::config, "manifest.jsonl: records must be indexed contiguously from 0");
    }
    m.records.push_back(std::move(r));
  }
  if (m.records.size() != n) throw Error(Errc::config, "manifest.jsonl holds a different number of records than n");
  return m;
}

/// Loads sample `index` and checks both files against the record.
inline SamplePair read_pair(const std::filesystem::path& dir, std::size_t index, const Manifest& manifest) {
  if (index >= manifest.records.size()) {
    throw Error(Errc::out_of_range, "sample " + std::to_string(index) + " out of range (n = " +
                                        std::to_string(manifest.records.size()) + ")");
  }
  const TransformRecord& r = manifest.records[index];
  Volume x = read_gvol(dir / sample_file("X", index));
  Volume xt = read_gvol(dir / sample_file("Xt", index));
  if (x.dims != r.shape || xt.dims != r.shape) throw Error(Errc::shape_mismatch, "sample file shape disagrees with record");
  if (fnv1a64(x.voxels) != r.checksum_x) throw Error(Errc::checksum_mismatch, sample_file("X", index) + " checksum mismatch");
  if (fnv1a64(xt.voxels) != r.checksum_xt) {
    throw Error(Errc::checksum_mismatch, sample_file("Xt", index) + " checksum mismatch");
  }
  return {Patch{r.origin, r.shape, std::move(x.voxels), r.source_id},
          Patch{r.origin, r.shape, std::move(xt.voxels), r.source_id}, r};
}

inline SamplePair read_pair(const std::filesystem::path& dir, std::size_t index) {
  return read_pair(dir, index, load_manifest(dir));
}

struct SampleStatus {
  std::size_t index = 0;
  bool ok = false;
  std::string message;
};

struct VerificationReport {
  std::vector<SampleStatus> samples;
  std::array<std::size_t, 12> scheme_counts{};

  std::size_t passed() const {
    return static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(), [](const auto& s) { return s.ok; }));
  }
  std::size_t failed() const { return samples.size() - passed(); }
  bool all_passed() const { return failed() == 0; }
};

inline nlohmann::ordered_json to_json(const VerificationReport& report) {
  using oj = nlohmann::ordered_json;
  oj j;
  j["n"] = report.samples.size();
  j["passed"] = report.passed();
  j["failed"] = report.failed();
  oj freq = oj::object();
  for (std::size_t i = 0; i < 12; ++i) freq[enumerate_schemes()[i]] = report.scheme_counts[i];
  j["scheme_counts"] = freq;
  oj failures = oj::array();
  for (const auto& s : report.samples) {
    if (!s.ok) failures.push_back({{"index", s.index}, {"error", s.message}});
  }
  j["failures"] = failures;
  return j;
}

/// Replays every record against the stored sources and checks the stored
/// pair files. A missing or unreadable recipe, manifest or source is an
/// error; a bad sample only marks that sample as failed.
inline VerificationReport verify_manifest(const std::filesystem::path& dir) {
  const Manifest m = load_manifest(dir);
  std::vector<SourceVolume> sources;
  for (const SourceEntry& e : m.sources) {
    Volume v = read_gvol(dir / "sources" / (e.id + ".gvol"));
    if (fnv1a64(v.voxels) != e.checksum) throw Error(Errc::checksum_mismatch, "source '" + e.id + "' checksum mismatch");
    sources.push_back({e.id, std::move(v)});
  }

  VerificationReport report;
  for (const TransformRecord& r : m.records) {
    ++report.scheme_counts[scheme_index(r.selection)];
    SampleStatus status{static_cast<std::size_t>(r.sample_index), false, {}};
    try {
      auto src = std::find_if(sources.begin(), sources.end(), [&](const SourceVolume& s) { return s.id == r.source_id; });
      if (src == sources.end()) throw Error(Errc::config, "unknown source '" + r.source_id + "'");
      const SamplePair stored = read_pair(dir, status.index, m);
      const auto [x, xt] = replay(src->volume, r);
      if (x.voxels != stored.x.voxels || xt.voxels != stored.xt.voxels) {
        throw Error(Errc::checksum_mismatch, "stored pair differs from replay");
      }
      status.ok = true;
    } catch (const Error& e) {
      status.message = e.what();
    }
    report.samples.push_back(std::move(status));
  }
  return report;
}

}  // namespace genesis
