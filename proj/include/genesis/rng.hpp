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

// Counter-based deterministic randomness.
//
// Every random decision of the pipeline is drawn from a splitmix64 stream
// whose initial state is derived from (master_seed, sample_index, tag). The
// generator and the derivation are fixed bit-for-bit so a manifest written by
// one build replays identically on any other.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "genesis/error.hpp"

namespace genesis {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// The splitmix64 output function (a bijection on 64-bit words).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// splitmix64 generator state. A plain value; copy it to fork a replay.
struct RngState {
  std::uint64_t state = 0;

  friend bool operator==(const RngState&, const RngState&) = default;
};

/// Advances the state and returns the next output.
constexpr std::uint64_t next_u64(RngState& rng) noexcept {
  rng.state += kGolden;
  return mix64(rng.state);
}

/// Value form of next_u64: returns the advanced state and the output.
constexpr std::pair<RngState, std::uint64_t> advanced(RngState rng) noexcept {
  const std::uint64_t out = next_u64(rng);
  return {rng, out};
}

enum class StreamTag : std::uint8_t { scheme = 0, crop = 1, nonlinear = 2, shuffle = 3, paint = 4 };

constexpr const char* to_string(StreamTag tag) noexcept {
  switch (tag) {
    case StreamTag::scheme: return "scheme";
    case StreamTag::crop: return "crop";
    case StreamTag::nonlinear: return "nonlinear";
    case StreamTag::shuffle: return "shuffle";
    case StreamTag::paint: return "paint";
  }
  return "unknown";
}

struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint64_t sample_index = 0;
  StreamTag tag = StreamTag::scheme;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

inline constexpr std::size_t kStreamKeyBytes = 17;

/// Serializes as master_seed (8 bytes LE) | sample_index (8 bytes LE) | tag.
inline std::array<std::uint8_t, kStreamKeyBytes> to_bytes(const StreamKey& key) {
  std::array<std::uint8_t, kStreamKeyBytes> out{};
  for (int i = 0; i < 8; ++i) {
    out[i] = static_cast<std::uint8_t>(key.master_seed >> (8 * i));
    out[8 + i] = static_cast<std::uint8_t>(key.sample_index >> (8 * i));
  }
  out[16] = static_cast<std::uint8_t>(key.tag);
  return out;
}

inline StreamKey stream_key_from_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kStreamKeyBytes) {
    throw Error(Errc::invalid_argument, "stream key must be 17 bytes");
  }
  if (bytes[16] > static_cast<std::uint8_t>(StreamTag::paint)) {
    throw Error(Errc::invalid_argument, "unknown stream tag " + std::to_string(bytes[16]));
  }
  StreamKey key;
  for (int i = 0; i < 8; ++i) {
    key.master_seed |= std::uint64_t{bytes[i]} << (8 * i);
    key.sample_index |= std::uint64_t{bytes[8 + i]} << (8 * i);
  }
  key.tag = static_cast<StreamTag>(bytes[16]);
  return key;
}

/// Lowercase hex of the 17-byte serialization (34 characters).
inline std::string to_hex(const StreamKey& key) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (std::uint8_t b : to_bytes(key)) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

inline StreamKey stream_key_from_hex(const std::string& hex) {
  if (hex.size() != 2 * kStreamKeyBytes) {
    throw Error(Errc::invalid_argument, "stream key hex must have 34 digits");
  }
  auto nibble = [](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
    throw Error(Errc::invalid_argument, "bad hex digit in stream key");
  };
  std::array<std::uint8_t, kStreamKeyBytes> bytes{};
  for (std::size_t i = 0; i < kStreamKeyBytes; ++i) {
    bytes[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
  }
  return stream_key_from_bytes(bytes);
}

/// Initial state for a stream. Two scrambles: the first binds the seed to the
/// tag, the second folds in the sample index. Both steps are bijective in
/// their varying input, so keys differing in one field never collide.
constexpr RngState derive_stream(const StreamKey& key) noexcept {
  const std::uint64_t tag = static_cast<std::uint64_t>(key.tag);
  const std::uint64_t seeded = mix64(key.master_seed + kGolden * (tag + 1));
  return RngState{mix64(seeded ^ (key.sample_index + kGolden))};
}

/// Double in [lo, hi) built from the top 53 bits of one draw.
inline double uniform(RngState& rng, double lo, double hi) {
  if (!(lo <= hi)) {
    throw Error(Errc::invalid_argument, "uniform: lo > hi");
  }
  const double unit = static_cast<double>(next_u64(rng) >> 11) * 0x1.0p-53;
  const double v = lo + (hi - lo) * unit;
  // lo + (hi-lo)*u can round up to hi for wide intervals.
  return (v < hi || lo == hi) ? v : std::nextafter(hi, lo);
}

/// Exactly uniform integer in [0, range) by Lemire's multiply-and-reject.
inline std::uint64_t bounded_u64(RngState& rng, std::uint64_t range) noexcept {
  if (range == 0) {
    return next_u64(rng);  // full 64-bit range
  }
  unsigned __int128 m = static_cast<unsigned __int128>(next_u64(rng)) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next_u64(rng)) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Uniform integer in [lo, hi_inclusive].
inline std::int64_t uniform_int(RngState& rng, std::int64_t lo, std::int64_t hi_inclusive) {
  if (lo > hi_inclusive) {
    throw Error(Errc::invalid_argument, "uniform_int: lo > hi");
  }
  const std::uint64_t range =
      static_cast<std::uint64_t>(hi_inclusive) - static_cast<std::uint64_t>(lo) + 1;
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + bounded_u64(rng, range));
}

/// Fisher-Yates permutation of 0..n-1.
inline std::vector<std::size_t> shuffle_indices(RngState& rng, std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i) - 1));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace genesis
