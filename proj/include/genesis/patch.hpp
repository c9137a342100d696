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
#include <array>
#include <string>
#include <vector>

#include "genesis/error.hpp"
#include "genesis/rng.hpp"
#include "genesis/volume.hpp"

namespace genesis {

/// A crop of a source volume. The transformed counterpart uses the same type.
struct Patch {
  Index3 origin{0, 0, 0};
  Shape3 shape;
  std::vector<float> voxels;
  std::string source_id;

  std::size_t offset(std::size_t z, std::size_t y, std::size_t x) const noexcept {
    return (z * shape.h + y) * shape.w + x;
  }

  friend bool operator==(const Patch&, const Patch&) = default;
};

/// Inclusive per-axis patch size bounds.
struct SizeRange {
  Shape3 min;
  Shape3 max;

  static SizeRange fixed(const Shape3& s) { return {s, s}; }

  /// (32-64)^3 for volumes, 64^2 for 2D images, capped by the volume dims.
  static SizeRange defaults_for(const Shape3& dims) {
    SizeRange r;
    if (dims.is_2d()) {
      r.min = {1, std::min<std::size_t>(64, dims.h), std::min<std::size_t>(64, dims.w)};
      r.max = r.min;
      return r;
    }
    for (std::size_t a = 0; a < 3; ++a) {
      r.max[a] = std::min<std::size_t>(64, dims[a]);
      r.min[a] = std::min<std::size_t>(32, r.max[a]);
    }
    return r;
  }
};

inline void validate(const SizeRange& range, const Shape3& dims) {
  for (std::size_t a = 0; a < 3; ++a) {
    if (range.min[a] < 1 || range.min[a] > range.max[a] || range.max[a] > dims[a]) {
      throw Error(Errc::infeasible, "size range axis " + std::to_string(a) + " is [" +
                                        std::to_string(range.min[a]) + ", " + std::to_string(range.max[a]) +
                                        "], volume extent " + std::to_string(dims[a]));
    }
  }
}

/// Exact crop of volume[origin, origin + shape).
inline Patch extract(const Volume& volume, const Index3& origin, const Shape3& shape,
                     std::string source_id = {}) {
  validate_dims(shape);
  for (std::size_t a = 0; a < 3; ++a) {
    if (origin[a] > volume.dims[a] || shape[a] > volume.dims[a] - origin[a]) {
      throw Error(Errc::out_of_bounds, "crop exceeds the volume along axis " + std::to_string(a));
    }
  }
  Patch p{origin, shape, std::vector<float>(shape.count()), std::move(source_id)};
  auto dst = p.voxels.begin();
  for (std::size_t z = 0; z < shape.d; ++z) {
    for (std::size_t y = 0; y < shape.h; ++y) {
      const auto src = volume.voxels.begin() +
                       static_cast<std::ptrdiff_t>(volume.offset(origin[0] + z, origin[1] + y, origin[2]));
      dst = std::copy(src, src + static_cast<std::ptrdiff_t>(shape.w), dst);
    }
  }
  return p;
}

/// Crop with per-axis sizes drawn from `range` (d, h, w order) followed by the
/// origin (z, y, x order), each uniform over the valid placements.
inline Patch sample_patch(const Volume& volume, const SizeRange& range, RngState& rng,
                          std::string source_id = {}) {
  validate(range, volume.dims);
  if (!is_normalized(volume.voxels)) {
    throw Error(Errc::not_normalized, "sample_patch requires a volume normalized to [0,1]");
  }
  Shape3 shape;
  for (std::size_t a = 0; a < 3; ++a) {
    shape[a] = static_cast<std::size_t>(
        uniform_int(rng, static_cast<std::int64_t>(range.min[a]), static_cast<std::int64_t>(range.max[a])));
  }
  Index3 origin{};
  for (std::size_t a = 0; a < 3; ++a) {
    origin[a] = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(volume.dims[a] - shape[a])));
  }
  return extract(volume, origin, shape, std::move(source_id));
}

inline Volume to_volume(const Patch& patch, Modality modality = Modality::other,
                        std::optional<std::array<double, 3>> spacing = std::nullopt) {
  return Volume{patch.shape, spacing, modality, patch.voxels};
}

}  // namespace genesis
