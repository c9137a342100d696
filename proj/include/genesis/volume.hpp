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
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "genesis/error.hpp"
#include "genesis/rng.hpp"

namespace genesis {

/// Extents in voxels, (depth, height, width). 2D images have d == 1.
struct Shape3 {
  std::size_t d = 1;
  std::size_t h = 1;
  std::size_t w = 1;

  constexpr std::size_t count() const noexcept { return d * h * w; }
  constexpr std::size_t operator[](std::size_t axis) const noexcept {
    return axis == 0 ? d : (axis == 1 ? h : w);
  }
  constexpr std::size_t& operator[](std::size_t axis) noexcept {
    return axis == 0 ? d : (axis == 1 ? h : w);
  }
  constexpr bool is_2d() const noexcept { return d == 1; }

  friend bool operator==(const Shape3&, const Shape3&) = default;
};

using Index3 = std::array<std::size_t, 3>;

enum class Modality { ct, xray, other };

inline std::string to_string(Modality m) {
  switch (m) {
    case Modality::ct: return "CT";
    case Modality::xray: return "XRAY";
    case Modality::other: return "OTHER";
  }
  return "OTHER";
}

inline Modality modality_from_string(const std::string& s) {
  if (s == "CT") return Modality::ct;
  if (s == "XRAY") return Modality::xray;
  if (s == "OTHER") return Modality::other;
  throw Error(Errc::config, "unknown modality '" + s + "'");
}

/// Dense scalar image, C order (depth-major, then rows, then columns).
struct Volume {
  Shape3 dims;
  std::optional<std::array<double, 3>> spacing;
  Modality modality = Modality::other;
  std::vector<float> voxels;

  std::size_t offset(std::size_t z, std::size_t y, std::size_t x) const noexcept {
    return (z * dims.h + y) * dims.w + x;
  }
  float at(std::size_t z, std::size_t y, std::size_t x) const noexcept {
    return voxels[offset(z, y, x)];
  }

  friend bool operator==(const Volume&, const Volume&) = default;
};

inline void validate_dims(const Shape3& dims) {
  if (dims.d == 0 || dims.h == 0 || dims.w == 0) {
    throw Error(Errc::invalid_dims, "all dimensions must be positive");
  }
}

inline void validate(const Volume& v) {
  validate_dims(v.dims);
  if (v.voxels.size() != v.dims.count()) {
    throw Error(Errc::shape_mismatch, "voxel count does not match dims");
  }
  for (float f : v.voxels) {
    if (!std::isfinite(f)) throw Error(Errc::non_finite, "volume contains a non-finite voxel");
  }
}

inline bool is_normalized(std::span<const float> voxels) {
  return std::all_of(voxels.begin(), voxels.end(),
                     [](float f) { return f >= 0.0f && f <= 1.0f; });
}

// ---------------------------------------------------------------------------
// Byte helpers. Everything on disk is little-endian regardless of host.

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}
inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}
inline std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{p[i]} << (8 * i);
  return v;
}
inline std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{p[i]} << (8 * i);
  return v;
}

inline void append_f32le(std::string& out, std::span<const float> values) {
  const std::size_t start = out.size();
  out.resize(start + 4 * values.size());
  char* dst = out.data() + start;
  for (float f : values) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    for (int i = 0; i < 4; ++i) *dst++ = static_cast<char>(bits >> (8 * i));
  }
}

inline void append_f64le(std::string& out, std::span<const double> values) {
  for (double f : values) put_u64(out, std::bit_cast<std::uint64_t>(f));
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::io, "read failed: " + path.string());
  return bytes;
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot open for writing " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "write failed: " + path.string());
}

}  // namespace detail

/// FNV-1a 64 over the little-endian bytes of the voxels.
inline std::uint64_t fnv1a64(std::span<const float> voxels) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (float f : voxels) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    for (int i = 0; i < 4; ++i) {
      h ^= (bits >> (8 * i)) & 0xFFu;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
  return out;
}

// ---------------------------------------------------------------------------
// GVOL container
//
//   bytes 0-3   "GVOL"
//   bytes 4-7   version (u32, = 1)
//   bytes 8-15  header_len (u64)
//   header_len bytes of JSON: {"dims":[d,h,w],"dtype":"f32le","modality":..,"spacing":..}
//   d*h*w little-endian f32 voxels

inline constexpr std::uint32_t kGvolVersion = 1;
inline constexpr std::size_t kPreambleBytes = 16;

struct GvolHeader {
  Shape3 dims;
  std::optional<std::array<double, 3>> spacing;
  Modality modality = Modality::other;
};

inline nlohmann::json header_json(const GvolHeader& h) {
  nlohmann::json j;
  j["dims"] = {h.dims.d, h.dims.h, h.dims.w};
  j["spacing"] = h.spacing ? nlohmann::json(*h.spacing) : nlohmann::json(nullptr);
  j["modality"] = to_string(h.modality);
  j["dtype"] = "f32le";
  return j;
}

/// Parses a header body (also used for the raw+sidecar conversion path).
inline GvolHeader parse_header_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(Errc::config, "header must be a JSON object");
  for (const char* key : {"dims", "modality"}) {
    if (!j.contains(key)) throw Error(Errc::config, std::string("header missing field '") + key + "'");
  }
  for (const auto& [key, _] : j.items()) {
    if (key != "dims" && key != "spacing" && key != "modality" && key != "dtype") {
      throw Error(Errc::config, "unknown header field '" + key + "'");
    }
  }
  if (j.contains("dtype") && j["dtype"] != "f32le") {
    throw Error(Errc::config, "dtype must be f32le");
  }
  const auto& dims = j["dims"];
  if (!dims.is_array() || dims.size() != 3) throw Error(Errc::config, "dims must be [d,h,w]");
  GvolHeader h;
  for (std::size_t a = 0; a < 3; ++a) {
    if (!dims[a].is_number_integer() || dims[a].get<std::int64_t>() < 0) {
      throw Error(Errc::config, "dims must be non-negative integers");
    }
    h.dims[a] = dims[a].get<std::size_t>();
  }
  if (!j["modality"].is_string()) throw Error(Errc::config, "modality must be a string");
  h.modality = modality_from_string(j["modality"].get<std::string>());
  if (j.contains("spacing") && !j["spacing"].is_null()) {
    const auto& sp = j["spacing"];
    if (!sp.is_array() || sp.size() != 3 || !std::all_of(sp.begin(), sp.end(), [](const auto& e) { return e.is_number(); })) {
      throw Error(Errc::config, "spacing must be [sz,sy,sx]");
    }
    h.spacing = std::array<double, 3>{sp[0].get<double>(), sp[1].get<double>(), sp[2].get<double>()};
  }
  return h;
}

inline std::string encode_gvol(const Volume& volume) {
  validate(volume);
  const std::string body = header_json({volume.dims, volume.spacing, volume.modality}).dump();
  std::string out = "GVOL";
  detail::put_u32(out, kGvolVersion);
  detail::put_u64(out, body.size());
  out += body;
  detail::append_f32le(out, volume.voxels);
  return out;
}

inline Volume decode_gvol(std::span<const unsigned char> bytes) {
  if (bytes.size() < kPreambleBytes || std::memcmp(bytes.data(), "GVOL", 4) != 0) {
    throw Error(Errc::bad_magic, "not a GVOL file");
  }
  const std::uint32_t version = detail::get_u32(bytes.data() + 4);
  if (version != kGvolVersion) {
    throw Error(Errc::version_mismatch, "unsupported GVOL version " + std::to_string(version));
  }
  const std::uint64_t header_len = detail::get_u64(bytes.data() + 8);
  if (header_len > bytes.size() - kPreambleBytes) {
    throw Error(Errc::truncated, "header extends past end of file");
  }
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(bytes.begin() + kPreambleBytes,
                                 bytes.begin() + kPreambleBytes + static_cast<std::ptrdiff_t>(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_header, std::string("malformed GVOL header: ") + e.what());
  }
  GvolHeader header;
  try {
    header = parse_header_json(body);
  } catch (const Error& e) {
    throw Error(Errc::bad_header, e.what());
  }
  validate_dims(header.dims);
  const std::size_t payload = bytes.size() - kPreambleBytes - header_len;
  const std::size_t expected = 4 * header.dims.count();
  if (payload < expected) throw Error(Errc::truncated, "voxel payload is short");
  if (payload > expected) throw Error(Errc::truncated, "trailing bytes after voxel payload");

  Volume v{header.dims, header.spacing, header.modality, std::vector<float>(header.dims.count())};
  const unsigned char* p = bytes.data() + kPreambleBytes + header_len;
  for (float& f : v.voxels) {
    f = std::bit_cast<float>(detail::get_u32(p));
    p += 4;
    if (!std::isfinite(f)) throw Error(Errc::non_finite, "volume contains a non-finite voxel");
  }
  return v;
}

inline void write_gvol(const Volume& volume, const std::filesystem::path& path) {
  detail::write_file(path, encode_gvol(volume));
}

inline Volume read_gvol(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file(path);
  return decode_gvol({reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()});
}

/// Builds a volume from raw little-endian f32 data plus a header document.
inline Volume volume_from_raw(std::span<const unsigned char> raw, const nlohmann::json& header) {
  const GvolHeader h = parse_header_json(header);
  validate_dims(h.dims);
  if (raw.size() != 4 * h.dims.count()) {
    throw Error(Errc::truncated, "raw payload has " + std::to_string(raw.size()) + " bytes, expected " +
                                     std::to_string(4 * h.dims.count()));
  }
  Volume v{h.dims, h.spacing, h.modality, std::vector<float>(h.dims.count())};
  for (std::size_t i = 0; i < v.voxels.size(); ++i) {
    v.voxels[i] = std::bit_cast<float>(detail::get_u32(raw.data() + 4 * i));
  }
  validate(v);
  return v;
}

// ---------------------------------------------------------------------------
// Normalization

/// Clips Hounsfield units to [-1000, 1000] and maps linearly onto [0, 1].
inline Volume normalize_ct(const Volume& volume) {
  if (volume.modality != Modality::ct) {
    throw Error(Errc::wrong_modality, "normalize_ct requires a CT volume; use normalize_minmax");
  }
  Volume out = volume;
  for (float& f : out.voxels) {
    const double hu = std::clamp(static_cast<double>(f), -1000.0, 1000.0);
    f = static_cast<float>((hu + 1000.0) / 2000.0);
  }
  return out;
}

/// Min-max rescale onto [0, 1] with no clipping.
inline Volume normalize_minmax(const Volume& volume) {
  if (volume.voxels.empty()) throw Error(Errc::invalid_dims, "empty volume");
  const auto [lo_it, hi_it] = std::minmax_element(volume.voxels.begin(), volume.voxels.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) throw Error(Errc::constant_volume, "cannot min-max normalize a constant volume");
  Volume out = volume;
  for (float& f : out.voxels) {
    f = static_cast<float>(std::clamp((static_cast<double>(f) - lo) / (hi - lo), 0.0, 1.0));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic phantoms: a smooth background ramp plus one structure.

enum class PhantomKind { sphere, cube, gradient, blobs };

inline std::string to_string(PhantomKind k) {
  switch (k) {
    case PhantomKind::sphere: return "sphere";
    case PhantomKind::cube: return "cube";
    case PhantomKind::gradient: return "gradient";
    case PhantomKind::blobs: return "blobs";
  }
  return "sphere";
}

inline PhantomKind phantom_kind_from_string(const std::string& s) {
  if (s == "sphere") return PhantomKind::sphere;
  if (s == "cube") return PhantomKind::cube;
  if (s == "gradient") return PhantomKind::gradient;
  if (s == "blobs") return PhantomKind::blobs;
  throw Error(Errc::config, "unknown phantom kind '" + s + "'");
}

struct Phantom {
  Volume volume;
  PhantomKind kind = PhantomKind::sphere;
  std::array<double, 3> center{};  // (z, y, x) voxel coordinates
  double radius = 0.0;
  double background = 0.0;         // ramp value at the low end of ramp_axis
  double ramp = 0.0;               // total ramp amplitude across ramp_axis
  std::size_t ramp_axis = 2;
  double foreground = 0.0;
};

inline Phantom make_phantom(PhantomKind kind, const Shape3& dims, RngState& rng) {
  const bool flat = dims.d == 1;
  if ((!flat && dims.d < 8) || dims.h < 8 || dims.w < 8) {
    throw Error(Errc::invalid_dims, "phantoms need at least 8 voxels per axis");
  }
  Phantom ph;
  ph.kind = kind;
  ph.volume.dims = dims;
  ph.volume.modality = Modality::other;
  ph.volume.voxels.assign(dims.count(), 0.0f);

  // The ramp axis is drawn among the non-degenerate axes.
  ph.ramp_axis = static_cast<std::size_t>(uniform_int(rng, flat ? 1 : 0, 2));
  ph.background = uniform(rng, 0.05, 0.25);
  ph.ramp = uniform(rng, 0.05, 0.2);
  ph.foreground = uniform(rng, 0.6, 0.9);

  const double min_extent =
      static_cast<double>(flat ? std::min(dims.h, dims.w) : std::min({dims.d, dims.h, dims.w}));
  ph.radius = uniform(rng, min_extent / 6.0, min_extent / 3.5);
  for (std::size_t a = 0; a < 3; ++a) {
    if (a == 0 && flat) {
      ph.center[a] = 0.0;
      continue;
    }
    const double margin = ph.radius + 1.0;
    const double hi = static_cast<double>(dims[a]) - 1.0 - margin;
    ph.center[a] = margin <= hi ? uniform(rng, margin, hi) : (static_cast<double>(dims[a]) - 1.0) / 2.0;
  }

  struct Blob {
    std::array<double, 3> c;
    double sigma;
    double amp;
  };
  std::vector<Blob> blobs;
  if (kind == PhantomKind::blobs) {
    for (int b = 0; b < 3; ++b) {
      Blob blob{};
      for (std::size_t a = 0; a < 3; ++a) {
        blob.c[a] = (a == 0 && flat) ? 0.0 : uniform(rng, 0.0, static_cast<double>(dims[a] - 1));
      }
      blob.sigma = uniform(rng, min_extent / 12.0, min_extent / 6.0);
      blob.amp = uniform(rng, 0.3, 0.6);
      blobs.push_back(blob);
    }
  }

  const double half_side = ph.radius;  // the cube circumscribes the sphere of the same draw
  const double axis_len = static_cast<double>(std::max<std::size_t>(dims[ph.ramp_axis] - 1, 1));
  for (std::size_t z = 0; z < dims.d; ++z) {
    for (std::size_t y = 0; y < dims.h; ++y) {
      for (std::size_t x = 0; x < dims.w; ++x) {
        const std::array<double, 3> p{static_cast<double>(z), static_cast<double>(y), static_cast<double>(x)};
        const double bg = ph.background + ph.ramp * p[ph.ramp_axis] / axis_len;
        double weight = 0.0;  // 1 inside the structure, 0 outside, soft within one voxel of the edge
        double value = bg;
        switch (kind) {
          case PhantomKind::sphere: {
            const double dist = std::sqrt((p[0] - ph.center[0]) * (p[0] - ph.center[0]) +
                                          (p[1] - ph.center[1]) * (p[1] - ph.center[1]) +
                                          (p[2] - ph.center[2]) * (p[2] - ph.center[2]));
            weight = std::clamp((ph.radius + 1.0 - dist) / 2.0, 0.0, 1.0);
            break;
          }
          case PhantomKind::cube: {
            double cheb = 0.0;
            for (std::size_t a = flat ? 1 : 0; a < 3; ++a) cheb = std::max(cheb, std::abs(p[a] - ph.center[a]));
            weight = std::clamp((half_side + 1.0 - cheb) / 2.0, 0.0, 1.0);
            break;
          }
          case PhantomKind::gradient:
            break;
          case PhantomKind::blobs:
            for (const Blob& b : blobs) {
              double d2 = 0.0;
              for (std::size_t a = 0; a < 3; ++a) d2 += (p[a] - b.c[a]) * (p[a] - b.c[a]);
              value += b.amp * std::exp(-d2 / (2.0 * b.sigma * b.sigma));
            }
            break;
        }
        if (weight > 0.0) value = bg + (ph.foreground - bg) * weight;
        ph.volume.voxels[ph.volume.offset(z, y, x)] = static_cast<float>(std::clamp(value, 0.0, 1.0));
      }
    }
  }
  return ph;
}

}  // namespace genesis
