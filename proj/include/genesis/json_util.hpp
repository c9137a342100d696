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

// Small strict readers over nlohmann::json. Every failure is an Errc::config
// error naming the offending path.

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"

#include "genesis/error.hpp"
#include "genesis/volume.hpp"

namespace genesis::json_util {

using nlohmann::json;

inline void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw Error(Errc::config, where + " must be an object");
}

/// Rejects keys that are not in `allowed`.
inline void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  require_object(j, where);
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(Errc::config, "unknown key '" + key + "' in " + where);
    }
  }
}

inline const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw Error(Errc::config, where + " is missing '" + key + "'");
  return j.at(key);
}

inline double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw Error(Errc::config, where + " must be a number");
  return v.get<double>();
}

inline double probability(const json& v, const std::string& where) {
  const double p = number(v, where);
  if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::config, where + " must be in [0, 1]");
  return p;
}

inline std::uint64_t unsigned_int(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw Error(Errc::config, where + " must be a non-negative integer");
}

inline std::string string(const json& v, const std::string& where) {
  if (!v.is_string()) throw Error(Errc::config, where + " must be a string");
  return v.get<std::string>();
}

inline bool boolean(const json& v, const std::string& where) {
  if (!v.is_boolean()) throw Error(Errc::config, where + " must be a boolean");
  return v.get<bool>();
}

inline Shape3 shape3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) throw Error(Errc::config, where + " must be [d, h, w]");
  Shape3 s;
  for (std::size_t a = 0; a < 3; ++a) {
    s[a] = static_cast<std::size_t>(unsigned_int(v[a], where));
    if (s[a] == 0) throw Error(Errc::config, where + " entries must be positive");
  }
  return s;
}

inline Index3 index3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) throw Error(Errc::config, where + " must be [z, y, x]");
  Index3 s{};
  for (std::size_t a = 0; a < 3; ++a) s[a] = static_cast<std::size_t>(unsigned_int(v[a], where));
  return s;
}

template <class Json = json>
Json to_json(const Shape3& s) {
  return Json::array({s.d, s.h, s.w});
}

template <class Json = json>
Json to_json(const Index3& s) {
  return Json::array({s[0], s[1], s[2]});
}

inline json parse(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::config, where + " is not valid JSON: " + e.what());
  }
}

}  // namespace genesis::json_util
