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

// The four patch distortions: monotone Bezier intensity remapping, local
// pixel shuffling, out-painting and in-painting. Every operator is a pure
// function of its inputs and the RngState it is handed; all randomness is
// consumed in a fixed, documented order so records can be replayed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "genesis/error.hpp"
#include "genesis/patch.hpp"
#include "genesis/rng.hpp"

namespace genesis {

// ---------------------------------------------------------------------------
// Non-linear intensity transformation

enum class CurveDirection { increasing, decreasing };

inline std::string to_string(CurveDirection d) {
  return d == CurveDirection::increasing ? "increasing" : "decreasing";
}

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Cubic Bezier with fixed end points and free control points in [0,1]^2.
struct BezierParams {
  std::array<Point2, 4> points{};
  CurveDirection direction = CurveDirection::increasing;

  friend bool operator==(const BezierParams&, const BezierParams&) = default;
};

/// Increasing curves run (0,0) -> (1,1); decreasing ones (0,1) -> (1,0).
inline BezierParams make_bezier(CurveDirection direction, Point2 p1, Point2 p2) {
  BezierParams b;
  b.direction = direction;
  if (direction == CurveDirection::increasing) {
    b.points = {Point2{0.0, 0.0}, p1, p2, Point2{1.0, 1.0}};
  } else {
    b.points = {Point2{0.0, 1.0}, p1, p2, Point2{1.0, 0.0}};
  }
  return b;
}

/// Draw order: direction, P1.x, P1.y, P2.x, P2.y.
inline BezierParams sample_bezier_params(RngState& rng) {
  const auto direction = uniform(rng, 0.0, 1.0) < 0.5 ? CurveDirection::increasing : CurveDirection::decreasing;
  Point2 p1, p2;
  p1.x = uniform(rng, 0.0, 1.0);
  p1.y = uniform(rng, 0.0, 1.0);
  p2.x = uniform(rng, 0.0, 1.0);
  p2.y = uniform(rng, 0.0, 1.0);
  return make_bezier(direction, p1, p2);
}

/// B(t) = (1-t)^3 P0 + 3(1-t)^2 t P1 + 3(1-t) t^2 P2 + t^3 P3.
inline Point2 bezier_point(const BezierParams& b, double t) {
  const double s = 1.0 - t;
  const double c0 = s * s * s;
  const double c1 = 3.0 * s * s * t;
  const double c2 = 3.0 * s * t * t;
  const double c3 = t * t * t;
  const auto& p = b.points;
  return {c0 * p[0].x + c1 * p[1].x + c2 * p[2].x + c3 * p[3].x,
          c0 * p[0].y + c1 * p[1].y + c2 * p[2].y + c3 * p[3].y};
}

/// Piecewise-linear lookup table sampled from a curve; knots sorted by x.
struct IntensityLUT {
  std::vector<double> xs;
  std::vector<double> ys;

  double operator()(double v) const {
    v = std::clamp(v, xs.front(), xs.back());
    auto hi = std::upper_bound(xs.begin(), xs.end(), v);
    if (hi == xs.end()) return ys.back();
    if (hi == xs.begin()) return ys.front();
    const auto i = static_cast<std::size_t>(hi - xs.begin());
    const double x0 = xs[i - 1], x1 = xs[i];
    const double y0 = ys[i - 1], y1 = ys[i];
    return y0 + (y1 - y0) * ((v - x0) / (x1 - x0));
  }
};

inline constexpr std::size_t kDefaultLutResolution = 1000;

/// Samples the curve at R evenly spaced t, sorts knots by x and drops
/// repeated x values (keeping the first).
///
/// With both end points at x=0 and x=1 and control x in [0,1], x(t) is
/// non-decreasing, so the knots trace a graph y(x) and the map is monotone.
inline IntensityLUT bezier_lut(const BezierParams& params, std::size_t resolution = kDefaultLutResolution) {
  if (resolution < 2) throw Error(Errc::invalid_argument, "LUT resolution must be at least 2");
  std::vector<Point2> knots(resolution);
  for (std::size_t i = 0; i < resolution; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(resolution - 1);
    knots[i] = bezier_point(params, t);
  }
  std::stable_sort(knots.begin(), knots.end(), [](const Point2& a, const Point2& b) { return a.x < b.x; });
  IntensityLUT lut;
  lut.xs.reserve(resolution);
  lut.ys.reserve(resolution);
  for (const Point2& k : knots) {
    if (!lut.xs.empty() && k.x == lut.xs.back()) continue;
    lut.xs.push_back(k.x);
    lut.ys.push_back(std::clamp(k.y, 0.0, 1.0));
  }
  return lut;
}

inline Patch apply_nonlinear(const Patch& patch, const IntensityLUT& lut) {
  Patch out = patch;
  for (float& v : out.voxels) {
    v = static_cast<float>(std::clamp(lut(static_cast<double>(v)), 0.0, 1.0));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Local pixel shuffling

/// Axis-aligned box inside a patch.
struct Window {
  Index3 offset{0, 0, 0};
  Shape3 extent;

  std::size_t count() const noexcept { return extent.count(); }
  friend bool operator==(const Window&, const Window&) = default;
};

/// One permutation per axis: depth slices, rows and columns.
struct AxisPermutation {
  std::vector<std::size_t> depth;
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
};

/// out[z][y][x] = in[depth[z]][rows[y]][cols[x]]; for a 2D window this is
/// P * W * P' with P, P' the permutation matrices of `rows` and `cols`.
template <class T>
std::vector<T> permute_window(std::span<const T> window, const Shape3& extent, const AxisPermutation& perm) {
  if (window.size() != extent.count() || perm.depth.size() != extent.d || perm.rows.size() != extent.h ||
      perm.cols.size() != extent.w) {
    throw Error(Errc::shape_mismatch, "permutation sizes do not match the window");
  }
  std::vector<T> out(window.size());
  std::size_t i = 0;
  for (std::size_t z = 0; z < extent.d; ++z) {
    for (std::size_t y = 0; y < extent.h; ++y) {
      const std::size_t row = (perm.depth[z] * extent.h + perm.rows[y]) * extent.w;
      for (std::size_t x = 0; x < extent.w; ++x) out[i++] = window[row + perm.cols[x]];
    }
  }
  return out;
}

enum class ShuffleMode { axis_permute, free_shuffle };

inline std::string to_string(ShuffleMode m) {
  return m == ShuffleMode::axis_permute ? "axis_permute" : "free_shuffle";
}

inline ShuffleMode shuffle_mode_from_string(const std::string& s) {
  if (s == "axis_permute") return ShuffleMode::axis_permute;
  if (s == "free_shuffle") return ShuffleMode::free_shuffle;
  throw Error(Errc::config, "unknown shuffle mode '" + s + "'");
}

/// Upper bound on shuffle window extents, standing in for the restorer's
/// receptive field.
inline constexpr Shape3 kDefaultReceptiveField{32, 32, 32};

/// patch_shape / 4 per axis, at least 1.
inline Shape3 default_shuffle_extent(const Shape3& patch_shape) {
  Shape3 e;
  for (std::size_t a = 0; a < 3; ++a) e[a] = std::max<std::size_t>(1, patch_shape[a] / 4);
  return e;
}

namespace detail {

template <class Fn>
void for_each_in_window(const Shape3& shape, const Window& w, Fn&& fn) {
  for (std::size_t z = 0; z < w.extent.d; ++z) {
    for (std::size_t y = 0; y < w.extent.h; ++y) {
      std::size_t idx = ((w.offset[0] + z) * shape.h + (w.offset[1] + y)) * shape.w + w.offset[2];
      for (std::size_t x = 0; x < w.extent.w; ++x) fn(idx++);
    }
  }
}

}  // namespace detail

/// Draws the window: extents (d, h, w) uniform in [1, max_extent], then the
/// offset (z, y, x) uniform over the placements inside the patch.
inline Window draw_shuffle_window(const Shape3& shape, const Shape3& max_extent, RngState& rng) {
  Window w;
  for (std::size_t a = 0; a < 3; ++a) {
    w.extent[a] = static_cast<std::size_t>(uniform_int(rng, 1, static_cast<std::int64_t>(max_extent[a])));
  }
  for (std::size_t a = 0; a < 3; ++a) {
    w.offset[a] = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(shape[a] - w.extent[a])));
  }
  return w;
}

/// Sequentially permutes the voxels of `num_windows` random windows. The
/// value multiset of the patch is preserved exactly.
///
/// If `trace` is non-null the drawn windows are appended to it.
inline Patch local_shuffle(const Patch& patch, std::size_t num_windows, const Shape3& max_extent,
                           ShuffleMode mode, RngState& rng,
                           const Shape3& receptive_field = kDefaultReceptiveField,
                           std::vector<Window>* trace = nullptr) {
  for (std::size_t a = 0; a < 3; ++a) {
    if (max_extent[a] < 1 || max_extent[a] > patch.shape[a] || max_extent[a] > receptive_field[a]) {
      throw Error(Errc::infeasible, "shuffle max extent " + std::to_string(max_extent[a]) + " on axis " +
                                        std::to_string(a) + " exceeds the patch or receptive-field bound");
    }
  }
  Patch out = patch;
  std::vector<float> gathered;
  std::vector<std::size_t> positions;
  for (std::size_t n = 0; n < num_windows; ++n) {
    const Window w = draw_shuffle_window(patch.shape, max_extent, rng);
    if (trace) trace->push_back(w);
    gathered.clear();
    positions.clear();
    detail::for_each_in_window(out.shape, w, [&](std::size_t idx) {
      positions.push_back(idx);
      gathered.push_back(out.voxels[idx]);
    });
    std::vector<float> permuted;
    if (mode == ShuffleMode::axis_permute) {
      AxisPermutation perm;
      perm.depth = shuffle_indices(rng, w.extent.d);
      perm.rows = shuffle_indices(rng, w.extent.h);
      perm.cols = shuffle_indices(rng, w.extent.w);
      permuted = permute_window<float>(gathered, w.extent, perm);
    } else {
      const auto perm = shuffle_indices(rng, gathered.size());
      permuted.resize(gathered.size());
      for (std::size_t i = 0; i < perm.size(); ++i) permuted[i] = gathered[perm[i]];
    }
    for (std::size_t i = 0; i < positions.size(); ++i) out.voxels[positions[i]] = permuted[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Painting masks

enum class PaintTarget { exterior, interior };

inline std::string to_string(PaintTarget t) { return t == PaintTarget::exterior ? "exterior" : "interior"; }

/// true = voxel keeps its original intensity.
struct PaintMask {
  Shape3 shape;
  std::vector<std::uint8_t> retained;
  std::vector<Window> windows;  // windows that contributed, in draw order
  std::size_t dilations = 0;

  std::size_t masked_count() const noexcept {
    return static_cast<std::size_t>(std::count(retained.begin(), retained.end(), std::uint8_t{0}));
  }
  double masked_fraction() const noexcept {
    return static_cast<double>(masked_count()) / static_cast<double>(retained.size());
  }
};

inline constexpr std::size_t kMaxPaintWindows = 10;
inline constexpr double kPaintCap = 0.25;

inline void validate_paint_settings(std::size_t max_windows, double cap) {
  if (max_windows < 1 || max_windows > kMaxPaintWindows) {
    throw Error(Errc::config, "paint max_windows must be in [1, 10]");
  }
  if (!(cap > 0.0 && cap <= kPaintCap)) throw Error(Errc::config, "paint cap must be in (0, 0.25]");
}

inline void validate_paint_shape(const Shape3& shape) {
  validate_dims(shape);
  for (std::size_t a = 0; a < 3; ++a) {
    if (shape[a] != 1 && shape[a] < 8) {
      throw Error(Errc::invalid_dims, "painting needs at least 8 voxels on every non-degenerate axis");
    }
  }
}

namespace detail {

/// Per-axis extent bounds: interior windows span [s/8, s/2], exterior
/// windows [s/4, 7s/8]; size-1 axes always get extent 1.
inline std::pair<std::size_t, std::size_t> paint_extent_bounds(std::size_t s, PaintTarget target) {
  if (s == 1) return {1, 1};
  if (target == PaintTarget::interior) return {std::max<std::size_t>(1, s / 8), std::max<std::size_t>(1, s / 2)};
  return {std::max<std::size_t>(1, s / 4), std::max<std::size_t>(1, 7 * s / 8)};
}

inline Window draw_paint_window(const Shape3& shape, PaintTarget target, RngState& rng) {
  Window w;
  for (std::size_t a = 0; a < 3; ++a) {
    const auto [lo, hi] = paint_extent_bounds(shape[a], target);
    w.extent[a] = static_cast<std::size_t>(uniform_int(rng, static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
  }
  for (std::size_t a = 0; a < 3; ++a) {
    w.offset[a] = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(shape[a] - w.extent[a])));
  }
  return w;
}

inline void check_window(const Shape3& shape, const Window& w) {
  for (std::size_t a = 0; a < 3; ++a) {
    if (w.extent[a] < 1 || w.offset[a] > shape[a] || w.extent[a] > shape[a] - w.offset[a]) {
      throw Error(Errc::out_of_bounds, "window does not fit the patch");
    }
  }
}

/// One step of face-neighbour dilation of the retained region.
inline void dilate_retained(const Shape3& shape, std::vector<std::uint8_t>& retained) {
  const std::vector<std::uint8_t> src = retained;
  const std::array<std::size_t, 3> stride{shape.h * shape.w, shape.w, 1};
  for (std::size_t z = 0; z < shape.d; ++z) {
    for (std::size_t y = 0; y < shape.h; ++y) {
      for (std::size_t x = 0; x < shape.w; ++x) {
        const std::size_t idx = (z * shape.h + y) * shape.w + x;
        if (src[idx]) continue;
        const std::array<std::size_t, 3> pos{z, y, x};
        for (std::size_t a = 0; a < 3 && !retained[idx]; ++a) {
          if (pos[a] > 0 && src[idx - stride[a]]) retained[idx] = 1;
          if (pos[a] + 1 < shape[a] && src[idx + stride[a]]) retained[idx] = 1;
        }
      }
    }
  }
}

}  // namespace detail

/// Rebuilds a mask from explicit windows (the replay path).
///
/// Exterior masks retain the union of the windows, grown by `dilations`
/// dilation steps; interior masks retain everything except the union.
inline PaintMask mask_from_windows(const Shape3& shape, std::span<const Window> windows, PaintTarget target,
                                   std::size_t dilations = 0) {
  validate_dims(shape);
  PaintMask mask;
  mask.shape = shape;
  mask.windows.assign(windows.begin(), windows.end());
  mask.dilations = dilations;
  const std::uint8_t inside = target == PaintTarget::exterior ? 1 : 0;
  mask.retained.assign(shape.count(), static_cast<std::uint8_t>(1 - inside));
  for (const Window& w : windows) {
    detail::check_window(shape, w);
    detail::for_each_in_window(shape, w, [&](std::size_t idx) { mask.retained[idx] = inside; });
  }
  for (std::size_t i = 0; i < dilations; ++i) detail::dilate_retained(shape, mask.retained);
  return mask;
}

/// Superimposes random windows into a mask whose masked fraction respects
/// `cap`.
///
/// exterior: windows are added until the masked surround drops below `cap`
/// or `max_windows` is reached; if still at or above `cap`, the union is
/// dilated until it is not.
///
/// interior: k ~ U{1..max_windows} windows are drawn; each is kept only if
/// the replaced fraction stays <= `cap`. At least one window is always kept.
inline PaintMask build_paint_mask(const Shape3& shape, std::size_t max_windows, double cap, PaintTarget target,
                                  RngState& rng) {
  validate_paint_shape(shape);
  validate_paint_settings(max_windows, cap);
  const double total = static_cast<double>(shape.count());

  PaintMask mask;
  mask.shape = shape;
  if (target == PaintTarget::exterior) {
    mask.retained.assign(shape.count(), 0);
    while (mask.windows.size() < max_windows) {
      const Window w = detail::draw_paint_window(shape, target, rng);
      mask.windows.push_back(w);
      detail::for_each_in_window(shape, w, [&](std::size_t idx) { mask.retained[idx] = 1; });
      if (static_cast<double>(mask.masked_count()) / total < cap) break;
    }
    while (static_cast<double>(mask.masked_count()) / total >= cap) {
      detail::dilate_retained(shape, mask.retained);
      ++mask.dilations;
    }
    return mask;
  }

  mask.retained.assign(shape.count(), 1);
  std::size_t replaced = 0;
  auto try_add = [&](const Window& w) {
    std::size_t added = 0;
    detail::for_each_in_window(shape, w, [&](std::size_t idx) { added += mask.retained[idx]; });
    if (static_cast<double>(replaced + added) > cap * total) return false;
    detail::for_each_in_window(shape, w, [&](std::size_t idx) { mask.retained[idx] = 0; });
    replaced += added;
    mask.windows.push_back(w);
    return true;
  };
  const auto attempts = static_cast<std::size_t>(uniform_int(rng, 1, static_cast<std::int64_t>(max_windows)));
  for (std::size_t i = 0; i < attempts; ++i) try_add(detail::draw_paint_window(shape, target, rng));
  if (mask.windows.empty()) {
    // Fall back to the smallest admissible window at a random placement.
    Window w;
    for (std::size_t a = 0; a < 3; ++a) w.extent[a] = detail::paint_extent_bounds(shape[a], target).first;
    for (std::size_t a = 0; a < 3; ++a) {
      w.offset[a] = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(shape[a] - w.extent[a])));
    }
    if (!try_add(w)) throw Error(Errc::infeasible, "no interior window fits under the paint cap");
  }
  return mask;
}

/// A painted patch plus what is needed to reproduce it.
struct Painted {
  Patch patch;
  PaintMask mask;
  std::vector<double> fills;
};

/// Sets every masked voxel to `fill`; retained voxels are untouched.
inline Patch fill_exterior(const Patch& patch, const PaintMask& mask, double fill) {
  if (mask.shape != patch.shape || mask.retained.size() != patch.voxels.size()) {
    throw Error(Errc::shape_mismatch, "mask shape does not match the patch");
  }
  Patch out = patch;
  const auto value = static_cast<float>(fill);
  for (std::size_t i = 0; i < out.voxels.size(); ++i) {
    if (!mask.retained[i]) out.voxels[i] = value;
  }
  return out;
}

/// Out-painting: one fill u ~ U[0,1) for the whole masked surround.
inline Painted out_paint(const Patch& patch, const PaintMask& mask, RngState& rng) {
  const double fill = uniform(rng, 0.0, 1.0);
  return {fill_exterior(patch, mask, fill), mask, {fill}};
}

/// Writes window i with fills[i], in order; later windows overwrite earlier.
inline Patch fill_windows(const Patch& patch, std::span<const Window> windows, std::span<const double> fills) {
  if (windows.size() != fills.size()) throw Error(Errc::shape_mismatch, "one fill per window is required");
  Patch out = patch;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    detail::check_window(patch.shape, windows[i]);
    const auto value = static_cast<float>(fills[i]);
    detail::for_each_in_window(patch.shape, windows[i], [&](std::size_t idx) { out.voxels[idx] = value; });
  }
  return out;
}

/// In-painting: interior windows are superimposed under the cap, each filled
/// with its own constant. Fills are drawn after the mask, one per window.
inline Painted in_paint(const Patch& patch, RngState& rng, std::size_t max_windows = kMaxPaintWindows,
                        double cap = kPaintCap) {
  PaintMask mask = build_paint_mask(patch.shape, max_windows, cap, PaintTarget::interior, rng);
  std::vector<double> fills;
  fills.reserve(mask.windows.size());
  for (std::size_t i = 0; i < mask.windows.size(); ++i) fills.push_back(uniform(rng, 0.0, 1.0));
  Patch out = fill_windows(patch, mask.windows, fills);
  return {std::move(out), std::move(mask), std::move(fills)};
}

}  // namespace genesis
