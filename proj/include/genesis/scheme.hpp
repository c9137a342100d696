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

// Composition of the four distortions into one training pair generator.
//
// Each patch independently draws non-linear, shuffle and painting with their
// own probabilities; painting then picks in- or out-painting, never both. The
// active transforms are applied in the fixed order
//
//     painting -> local shuffle -> non-linear
//
// and everything needed to rebuild X~ from the source volume is captured in a
// TransformRecord.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "genesis/error.hpp"
#include "genesis/json_util.hpp"
#include "genesis/patch.hpp"
#include "genesis/rng.hpp"
#include "genesis/transforms.hpp"

namespace genesis {

struct ShuffleSettings {
  std::size_t num_windows = 1000;
  std::optional<Shape3> max_extent;  // unset: patch_shape / 4
  ShuffleMode mode = ShuffleMode::axis_permute;
  Shape3 receptive_field = kDefaultReceptiveField;
};

struct PaintSettings {
  std::size_t max_windows = kMaxPaintWindows;
  double cap = kPaintCap;
};

struct SchemeConfig {
  double p_nonlinear = 0.9;
  double p_shuffle = 0.5;
  double p_paint = 0.9;
  double p_inpaint_given_paint = 0.8;
  ShuffleSettings shuffle;
  PaintSettings paint;
  std::size_t lut_resolution = kDefaultLutResolution;

  /// "unified" (the defaults), "distortion" (non-linear and shuffle always,
  /// no painting), "painting" (painting only) or "identity".
  static SchemeConfig preset(std::string_view name) {
    SchemeConfig c;
    if (name == "unified") return c;
    if (name == "distortion") {
      c.p_nonlinear = 1.0;
      c.p_shuffle = 1.0;
      c.p_paint = 0.0;
      return c;
    }
    if (name == "painting") {
      c.p_nonlinear = 0.0;
      c.p_shuffle = 0.0;
      c.p_paint = 1.0;
      return c;
    }
    if (name == "identity") {
      c.p_nonlinear = c.p_shuffle = c.p_paint = 0.0;
      return c;
    }
    throw Error(Errc::config, "unknown scheme preset '" + std::string(name) + "'");
  }
};

inline void validate(const SchemeConfig& c) {
  for (double p : {c.p_nonlinear, c.p_shuffle, c.p_paint, c.p_inpaint_given_paint}) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::config, "scheme probabilities must lie in [0, 1]");
  }
  validate_paint_settings(c.paint.max_windows, c.paint.cap);
  if (c.lut_resolution < 2) throw Error(Errc::config, "lut_resolution must be at least 2");
  for (std::size_t a = 0; a < 3; ++a) {
    if (c.shuffle.receptive_field[a] < 1) throw Error(Errc::config, "receptive_field entries must be positive");
    if (c.shuffle.max_extent && (*c.shuffle.max_extent)[a] > c.shuffle.receptive_field[a]) {
      throw Error(Errc::config, "shuffle max_extent must not exceed receptive_field");
    }
  }
}

/// Reads the "scheme" section of a run config. Unknown keys are rejected;
/// missing keys keep the values of `preset` (or the defaults).
inline SchemeConfig scheme_config_from_json(const nlohmann::json& j) {
  namespace ju = json_util;
  ju::check_keys(j,
                 {"preset", "p_nonlinear", "p_shuffle", "p_paint", "p_inpaint_given_paint", "shuffle", "paint",
                  "lut_resolution"},
                 "scheme");
  SchemeConfig c = j.contains("preset") ? SchemeConfig::preset(ju::string(j["preset"], "scheme.preset")) : SchemeConfig{};
  if (j.contains("p_nonlinear")) c.p_nonlinear = ju::probability(j["p_nonlinear"], "scheme.p_nonlinear");
  if (j.contains("p_shuffle")) c.p_shuffle = ju::probability(j["p_shuffle"], "scheme.p_shuffle");
  if (j.contains("p_paint")) c.p_paint = ju::probability(j["p_paint"], "scheme.p_paint");
  if (j.contains("p_inpaint_given_paint")) {
    c.p_inpaint_given_paint = ju::probability(j["p_inpaint_given_paint"], "scheme.p_inpaint_given_paint");
  }
  if (j.contains("lut_resolution")) {
    c.lut_resolution = static_cast<std::size_t>(ju::unsigned_int(j["lut_resolution"], "scheme.lut_resolution"));
  }
  if (j.contains("shuffle")) {
    const auto& s = j["shuffle"];
    ju::check_keys(s, {"num_windows", "max_extent", "mode", "receptive_field"}, "scheme.shuffle");
    if (s.contains("num_windows")) {
      c.shuffle.num_windows = static_cast<std::size_t>(ju::unsigned_int(s["num_windows"], "scheme.shuffle.num_windows"));
    }
    if (s.contains("max_extent") && !s["max_extent"].is_null()) {
      c.shuffle.max_extent = ju::shape3(s["max_extent"], "scheme.shuffle.max_extent");
    }
    if (s.contains("mode")) c.shuffle.mode = shuffle_mode_from_string(ju::string(s["mode"], "scheme.shuffle.mode"));
    if (s.contains("receptive_field")) {
      c.shuffle.receptive_field = ju::shape3(s["receptive_field"], "scheme.shuffle.receptive_field");
    }
  }
  if (j.contains("paint")) {
    const auto& p = j["paint"];
    ju::check_keys(p, {"max_windows", "cap"}, "scheme.paint");
    if (p.contains("max_windows")) {
      c.paint.max_windows = static_cast<std::size_t>(ju::unsigned_int(p["max_windows"], "scheme.paint.max_windows"));
    }
    if (p.contains("cap")) c.paint.cap = ju::number(p["cap"], "scheme.paint.cap");
  }
  validate(c);
  return c;
}

inline nlohmann::ordered_json to_json(const SchemeConfig& c) {
  nlohmann::ordered_json j;
  j["p_nonlinear"] = c.p_nonlinear;
  j["p_shuffle"] = c.p_shuffle;
  j["p_paint"] = c.p_paint;
  j["p_inpaint_given_paint"] = c.p_inpaint_given_paint;
  j["shuffle"] = {
      {"num_windows", c.shuffle.num_windows},
      {"max_extent", c.shuffle.max_extent ? json_util::to_json<nlohmann::ordered_json>(*c.shuffle.max_extent)
                                          : nlohmann::ordered_json(nullptr)},
      {"mode", to_string(c.shuffle.mode)},
      {"receptive_field", json_util::to_json<nlohmann::ordered_json>(c.shuffle.receptive_field)}};
  j["paint"] = {{"max_windows", c.paint.max_windows}, {"cap", c.paint.cap}};
  j["lut_resolution"] = c.lut_resolution;
  return j;
}

// ---------------------------------------------------------------------------
// Selection

enum class PaintChoice { none, out, in };

inline std::string to_string(PaintChoice p) {
  switch (p) {
    case PaintChoice::none: return "none";
    case PaintChoice::out: return "out";
    case PaintChoice::in: return "in";
  }
  return "none";
}

inline PaintChoice paint_choice_from_string(const std::string& s) {
  if (s == "none") return PaintChoice::none;
  if (s == "out") return PaintChoice::out;
  if (s == "in") return PaintChoice::in;
  throw Error(Errc::config, "unknown paint choice '" + s + "'");
}

struct SchemeSelection {
  bool nonlinear = false;
  bool shuffle = false;
  PaintChoice paint = PaintChoice::none;

  int active_count() const noexcept {
    return int{nonlinear} + int{shuffle} + int{paint != PaintChoice::none};
  }
  bool is_identity() const noexcept { return active_count() == 0; }

  /// "identity", or active parts joined by '+' in the order NL, LS, OP/IP.
  std::string label() const {
    std::string out;
    auto add = [&out](const char* part) {
      if (!out.empty()) out += '+';
      out += part;
    };
    if (nonlinear) add("NL");
    if (shuffle) add("LS");
    if (paint == PaintChoice::out) add("OP");
    if (paint == PaintChoice::in) add("IP");
    return out.empty() ? "identity" : out;
  }

  friend bool operator==(const SchemeSelection&, const SchemeSelection&) = default;
};

/// The twelve reachable schemes: identity, the four single transforms and
/// the seven combinations that keep the two paintings apart.
inline const std::array<std::string, 12>& enumerate_schemes() {
  static const std::array<std::string, 12> kSchemes = {
      "identity", "NL",    "LS",    "OP",    "IP",       "NL+LS",
      "NL+OP",    "NL+IP", "LS+OP", "LS+IP", "NL+LS+OP", "NL+LS+IP"};
  return kSchemes;
}

inline std::size_t scheme_index(const SchemeSelection& s) {
  const auto& all = enumerate_schemes();
  const std::string label = s.label();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i] == label) return i;
  }
  throw Error(Errc::invalid_argument, "unreachable scheme " + label);
}

/// Probability of each enumerated scheme under independent draws.
inline std::array<double, 12> scheme_probabilities(const SchemeConfig& c) {
  std::array<double, 12> out{};
  for (int nl = 0; nl < 2; ++nl) {
    for (int ls = 0; ls < 2; ++ls) {
      for (PaintChoice p : {PaintChoice::none, PaintChoice::out, PaintChoice::in}) {
        double prob = (nl ? c.p_nonlinear : 1.0 - c.p_nonlinear) * (ls ? c.p_shuffle : 1.0 - c.p_shuffle);
        switch (p) {
          case PaintChoice::none: prob *= 1.0 - c.p_paint; break;
          case PaintChoice::out: prob *= c.p_paint * (1.0 - c.p_inpaint_given_paint); break;
          case PaintChoice::in: prob *= c.p_paint * c.p_inpaint_given_paint; break;
        }
        out[scheme_index(SchemeSelection{nl == 1, ls == 1, p})] += prob;
      }
    }
  }
  return out;
}

/// Four draws, always consumed: non-linear, shuffle, paint, in-vs-out.
inline SchemeSelection draw_scheme(const SchemeConfig& config, RngState& rng) {
  SchemeSelection s;
  const double u_nl = uniform(rng, 0.0, 1.0);
  const double u_ls = uniform(rng, 0.0, 1.0);
  const double u_paint = uniform(rng, 0.0, 1.0);
  const double u_in = uniform(rng, 0.0, 1.0);
  s.nonlinear = u_nl < config.p_nonlinear;
  s.shuffle = u_ls < config.p_shuffle;
  if (u_paint < config.p_paint) s.paint = u_in < config.p_inpaint_given_paint ? PaintChoice::in : PaintChoice::out;
  return s;
}

// ---------------------------------------------------------------------------
// Records

struct NonlinearRecord {
  BezierParams params;
  std::size_t resolution = kDefaultLutResolution;
};

/// Shuffle windows are not listed; they are re-drawn from the stream key.
struct ShuffleRecord {
  StreamKey key;
  std::size_t num_windows = 0;
  Shape3 max_extent;
  ShuffleMode mode = ShuffleMode::axis_permute;
  Shape3 receptive_field = kDefaultReceptiveField;
};

struct PaintRecord {
  PaintTarget target = PaintTarget::exterior;
  std::vector<Window> windows;
  std::size_t dilations = 0;
  std::vector<double> fills;  // one for exterior, one per window for interior
};

struct TransformRecord {
  std::uint64_t sample_index = 0;
  std::string source_id;
  Index3 origin{0, 0, 0};
  Shape3 shape;
  SchemeSelection selection;
  std::optional<PaintRecord> paint;
  std::optional<ShuffleRecord> shuffle;
  std::optional<NonlinearRecord> nonlinear;
  std::uint64_t checksum_x = 0;
  std::uint64_t checksum_xt = 0;
};

/// Key order is part of the manifest format.
inline nlohmann::ordered_json to_json(const TransformRecord& r) {
  using oj = nlohmann::ordered_json;
  oj j;
  j["sample_index"] = r.sample_index;
  j["source_id"] = r.source_id;
  j["crop"] = {{"origin", json_util::to_json<oj>(r.origin)}, {"shape", json_util::to_json<oj>(r.shape)}};
  j["scheme"] = r.selection.label();
  j["selection"] = {{"nonlinear", r.selection.nonlinear},
                    {"shuffle", r.selection.shuffle},
                    {"paint", to_string(r.selection.paint)}};
  if (r.paint) {
    oj windows = oj::array();
    for (const Window& w : r.paint->windows) {
      windows.push_back({{"offset", json_util::to_json<oj>(w.offset)}, {"extent", json_util::to_json<oj>(w.extent)}});
    }
    j["paint"] = {{"target", to_string(r.paint->target)},
                  {"windows", windows},
                  {"dilations", r.paint->dilations},
                  {"fills", r.paint->fills}};
  } else {
    j["paint"] = nullptr;
  }
  if (r.shuffle) {
    j["shuffle"] = {{"stream_key", to_hex(r.shuffle->key)},
                    {"num_windows", r.shuffle->num_windows},
                    {"max_extent", json_util::to_json<oj>(r.shuffle->max_extent)},
                    {"mode", to_string(r.shuffle->mode)},
                    {"receptive_field", json_util::to_json<oj>(r.shuffle->receptive_field)}};
  } else {
    j["shuffle"] = nullptr;
  }
  if (r.nonlinear) {
    oj points = oj::array();
    for (const Point2& p : r.nonlinear->params.points) points.push_back({p.x, p.y});
    j["nonlinear"] = {{"direction", to_string(r.nonlinear->params.direction)},
                      {"points", points},
                      {"resolution", r.nonlinear->resolution}};
  } else {
    j["nonlinear"] = nullptr;
  }
  j["checksum_x"] = hex64(r.checksum_x);
  j["checksum_xt"] = hex64(r.checksum_xt);
  return j;
}

namespace detail {

inline std::uint64_t parse_hex64(const std::string& s) {
  if (s.size() != 16) throw Error(Errc::config, "checksum must be 16 hex digits");
  std::uint64_t v = 0;
  for (char c : s) {
    v <<= 4;
    if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
    else throw Error(Errc::config, "bad hex digit in checksum");
  }
  return v;
}

inline Point2 point_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(Errc::config, "curve points must be [x, y]");
  return {json_util::number(j[0], "point.x"), json_util::number(j[1], "point.y")};
}

}  // namespace detail

inline TransformRecord transform_record_from_json(const nlohmann::json& j) {
  namespace ju = json_util;
  ju::check_keys(j,
                 {"sample_index", "source_id", "crop", "scheme", "selection", "paint", "shuffle", "nonlinear",
                  "checksum_x", "checksum_xt"},
                 "record");
  TransformRecord r;
  r.sample_index = ju::unsigned_int(ju::require(j, "sample_index", "record"), "record.sample_index");
  r.source_id = ju::string(ju::require(j, "source_id", "record"), "record.source_id");
  const auto& crop = ju::require(j, "crop", "record");
  ju::check_keys(crop, {"origin", "shape"}, "record.crop");
  r.origin = ju::index3(ju::require(crop, "origin", "record.crop"), "record.crop.origin");
  r.shape = ju::shape3(ju::require(crop, "shape", "record.crop"), "record.crop.shape");
  const auto& sel = ju::require(j, "selection", "record");
  ju::check_keys(sel, {"nonlinear", "shuffle", "paint"}, "record.selection");
  r.selection.nonlinear = ju::boolean(ju::require(sel, "nonlinear", "record.selection"), "selection.nonlinear");
  r.selection.shuffle = ju::boolean(ju::require(sel, "shuffle", "record.selection"), "selection.shuffle");
  r.selection.paint = paint_choice_from_string(ju::string(ju::require(sel, "paint", "record.selection"), "paint"));
  if (j.contains("scheme") && ju::string(j["scheme"], "record.scheme") != r.selection.label()) {
    throw Error(Errc::config, "record scheme label disagrees with its selection");
  }

  if (j.contains("paint") && !j["paint"].is_null()) {
    const auto& p = j["paint"];
    ju::check_keys(p, {"target", "windows", "dilations", "fills"}, "record.paint");
    PaintRecord pr;
    const std::string target = ju::string(ju::require(p, "target", "record.paint"), "record.paint.target");
    if (target != "exterior" && target != "interior") throw Error(Errc::config, "bad paint target " + target);
    pr.target = target == "exterior" ? PaintTarget::exterior : PaintTarget::interior;
    for (const auto& w : ju::require(p, "windows", "record.paint")) {
      ju::check_keys(w, {"offset", "extent"}, "record.paint.windows[]");
      pr.windows.push_back({ju::index3(ju::require(w, "offset", "window"), "window.offset"),
                            ju::shape3(ju::require(w, "extent", "window"), "window.extent")});
    }
    pr.dilations = static_cast<std::size_t>(ju::unsigned_int(ju::require(p, "dilations", "record.paint"), "dilations"));
    for (const auto& f : ju::require(p, "fills", "record.paint")) pr.fills.push_back(ju::number(f, "fill"));
    r.paint = std::move(pr);
  }
  if (j.contains("shuffle") && !j["shuffle"].is_null()) {
    const auto& s = j["shuffle"];
    ju::check_keys(s, {"stream_key", "num_windows", "max_extent", "mode", "receptive_field"}, "record.shuffle");
    ShuffleRecord sr;
    try {
      sr.key = stream_key_from_hex(ju::string(ju::require(s, "stream_key", "record.shuffle"), "stream_key"));
    } catch (const Error& e) {
      throw Error(Errc::config, e.what());
    }
    sr.num_windows = static_cast<std::size_t>(ju::unsigned_int(ju::require(s, "num_windows", "record.shuffle"), "num_windows"));
    sr.max_extent = ju::shape3(ju::require(s, "max_extent", "record.shuffle"), "max_extent");
    sr.mode = shuffle_mode_from_string(ju::string(ju::require(s, "mode", "record.shuffle"), "mode"));
    sr.receptive_field = ju::shape3(ju::require(s, "receptive_field", "record.shuffle"), "receptive_field");
    r.shuffle = sr;
  }
  if (j.contains("nonlinear") && !j["nonlinear"].is_null()) {
    const auto& n = j["nonlinear"];
    ju::check_keys(n, {"direction", "points", "resolution"}, "record.nonlinear");
    NonlinearRecord nr;
    const std::string dir = ju::string(ju::require(n, "direction", "record.nonlinear"), "direction");
    if (dir != "increasing" && dir != "decreasing") throw Error(Errc::config, "bad curve direction " + dir);
    nr.params.direction = dir == "increasing" ? CurveDirection::increasing : CurveDirection::decreasing;
    const auto& pts = ju::require(n, "points", "record.nonlinear");
    if (!pts.is_array() || pts.size() != 4) throw Error(Errc::config, "nonlinear.points must hold 4 points");
    for (std::size_t i = 0; i < 4; ++i) nr.params.points[i] = detail::point_from_json(pts[i]);
    nr.resolution = static_cast<std::size_t>(ju::unsigned_int(ju::require(n, "resolution", "record.nonlinear"), "resolution"));
    r.nonlinear = nr;
  }
  if (r.selection.nonlinear != r.nonlinear.has_value() || r.selection.shuffle != r.shuffle.has_value() ||
      (r.selection.paint != PaintChoice::none) != r.paint.has_value()) {
    throw Error(Errc::config, "record parameters disagree with its selection");
  }
  r.checksum_x = detail::parse_hex64(ju::string(ju::require(j, "checksum_x", "record"), "checksum_x"));
  r.checksum_xt = detail::parse_hex64(ju::string(ju::require(j, "checksum_xt", "record"), "checksum_xt"));
  return r;
}

// ---------------------------------------------------------------------------
// Applying and replaying

/// Applies the recorded parameters to X in the fixed order.
inline Patch apply_record(const Patch& x, const TransformRecord& r) {
  Patch out = x;
  if (r.paint) {
    const PaintRecord& p = *r.paint;
    if (p.target == PaintTarget::exterior) {
      if (p.fills.size() != 1) throw Error(Errc::shape_mismatch, "out-painting records exactly one fill");
      out = fill_exterior(out, mask_from_windows(out.shape, p.windows, PaintTarget::exterior, p.dilations),
                          p.fills.front());
    } else {
      out = fill_windows(out, p.windows, p.fills);
    }
  }
  if (r.shuffle) {
    RngState rng = derive_stream(r.shuffle->key);
    out = local_shuffle(out, r.shuffle->num_windows, r.shuffle->max_extent, r.shuffle->mode, rng,
                        r.shuffle->receptive_field);
  }
  if (r.nonlinear) {
    out = apply_nonlinear(out, bezier_lut(r.nonlinear->params, r.nonlinear->resolution));
  }
  return out;
}

/// Shuffle extent actually used for a patch: the configured bound (or
/// patch/4) clipped to the patch.
inline Shape3 effective_shuffle_extent(const ShuffleSettings& s, const Shape3& patch_shape) {
  Shape3 e = s.max_extent ? *s.max_extent : default_shuffle_extent(patch_shape);
  for (std::size_t a = 0; a < 3; ++a) e[a] = std::clamp<std::size_t>(e[a], 1, patch_shape[a]);
  return e;
}

/// Draws every parameter of `selection` from the per-sample streams of
/// (master_seed, sample_index), applies them to X and returns (X~, record).
inline std::pair<Patch, TransformRecord> transform(const Patch& x, const SchemeSelection& selection,
                                                   const SchemeConfig& config, std::uint64_t master_seed,
                                                   std::uint64_t sample_index) {
  if (x.voxels.size() != x.shape.count()) throw Error(Errc::shape_mismatch, "patch voxel count does not match shape");
  if (!is_normalized(x.voxels)) throw Error(Errc::not_normalized, "patch values must lie in [0,1]");

  TransformRecord r;
  r.sample_index = sample_index;
  r.source_id = x.source_id;
  r.origin = x.origin;
  r.shape = x.shape;
  r.selection = selection;
  auto stream = [&](StreamTag tag) { return StreamKey{master_seed, sample_index, tag}; };

  if (selection.paint != PaintChoice::none) {
    RngState rng = derive_stream(stream(StreamTag::paint));
    PaintRecord p;
    if (selection.paint == PaintChoice::out) {
      const PaintMask mask =
          build_paint_mask(x.shape, config.paint.max_windows, config.paint.cap, PaintTarget::exterior, rng);
      p.target = PaintTarget::exterior;
      p.windows = mask.windows;
      p.dilations = mask.dilations;
      p.fills = {uniform(rng, 0.0, 1.0)};
    } else {
      Painted painted = in_paint(x, rng, config.paint.max_windows, config.paint.cap);
      p.target = PaintTarget::interior;
      p.windows = std::move(painted.mask.windows);
      p.fills = std::move(painted.fills);
    }
    r.paint = std::move(p);
  }
  if (selection.shuffle) {
    r.shuffle = ShuffleRecord{stream(StreamTag::shuffle), config.shuffle.num_windows,
                              effective_shuffle_extent(config.shuffle, x.shape), config.shuffle.mode,
                              config.shuffle.receptive_field};
  }
  if (selection.nonlinear) {
    RngState rng = derive_stream(stream(StreamTag::nonlinear));
    r.nonlinear = NonlinearRecord{sample_bezier_params(rng), config.lut_resolution};
  }

  Patch xt = apply_record(x, r);
  r.checksum_x = fnv1a64(x.voxels);
  r.checksum_xt = fnv1a64(xt.voxels);
  return {std::move(xt), std::move(r)};
}

/// Draws the selection from the sample's scheme stream, then transforms.
inline std::pair<Patch, TransformRecord> transform_sample(const Patch& x, const SchemeConfig& config,
                                                          std::uint64_t master_seed, std::uint64_t sample_index) {
  RngState rng = derive_stream({master_seed, sample_index, StreamTag::scheme});
  return transform(x, draw_scheme(config, rng), config, master_seed, sample_index);
}

/// Re-extracts the crop and re-applies the recorded parameters, checking
/// both checksums.
inline std::pair<Patch, Patch> replay(const Volume& source, const TransformRecord& record) {
  Patch x = extract(source, record.origin, record.shape, record.source_id);
  if (fnv1a64(x.voxels) != record.checksum_x) {
    throw Error(Errc::checksum_mismatch, "sample " + std::to_string(record.sample_index) + ": X checksum mismatch");
  }
  Patch xt = apply_record(x, record);
  if (fnv1a64(xt.voxels) != record.checksum_xt) {
    throw Error(Errc::checksum_mismatch, "sample " + std::to_string(record.sample_index) + ": X~ checksum mismatch");
  }
  return {std::move(x), std::move(xt)};
}

/// In-memory entry point for host-language bridges: the whole array is the
/// patch; `scheme_json` is the "scheme" section of a run config. Returns X~
/// and the record serialized as JSON.
inline std::pair<std::vector<float>, std::string> transform_array(std::span<const float> voxels, const Shape3& shape,
                                                                  const std::string& scheme_json,
                                                                  std::uint64_t master_seed,
                                                                  std::uint64_t sample_index) {
  validate_dims(shape);
  if (voxels.size() != shape.count()) throw Error(Errc::shape_mismatch, "array size does not match shape");
  for (float f : voxels) {
    if (!std::isfinite(f)) throw Error(Errc::non_finite, "array contains a non-finite value");
  }
  const SchemeConfig config = scheme_config_from_json(json_util::parse(scheme_json, "scheme config"));
  Patch x{{0, 0, 0}, shape, std::vector<float>(voxels.begin(), voxels.end()), "memory"};
  auto [xt, record] = transform_sample(x, config, master_seed, sample_index);
  return {std::move(xt.voxels), to_json(record).dump()};
}

}  // namespace genesis
