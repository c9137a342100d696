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

#include <stdexcept>
#include <string>
#include <string_view>

namespace genesis {

/// Fine-grained failure reasons. Each maps onto one coarse category, which
/// in turn decides the CLI exit code.
enum class Errc {
  invalid_argument,
  config,
  io,
  bad_magic,
  bad_header,
  version_mismatch,
  truncated,
  non_finite,
  invalid_dims,
  not_normalized,
  wrong_modality,
  constant_volume,
  out_of_bounds,
  shape_mismatch,
  infeasible,
  out_of_range,
  checksum_mismatch,
  single_class,
};

enum class ErrorCategory { argument, config, io, format, verification };

constexpr ErrorCategory category_of(Errc code) noexcept {
  switch (code) {
    case Errc::config:
      return ErrorCategory::config;
    case Errc::io:
      return ErrorCategory::io;
    case Errc::bad_magic:
    case Errc::bad_header:
    case Errc::version_mismatch:
    case Errc::truncated:
    case Errc::non_finite:
      return ErrorCategory::format;
    case Errc::checksum_mismatch:
      return ErrorCategory::verification;
    default:
      return ErrorCategory::argument;
  }
}

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::config: return "config";
    case Errc::io: return "io";
    case Errc::bad_magic: return "bad_magic";
    case Errc::bad_header: return "bad_header";
    case Errc::version_mismatch: return "version_mismatch";
    case Errc::truncated: return "truncated";
    case Errc::non_finite: return "non_finite";
    case Errc::invalid_dims: return "invalid_dims";
    case Errc::not_normalized: return "not_normalized";
    case Errc::wrong_modality: return "wrong_modality";
    case Errc::constant_volume: return "constant_volume";
    case Errc::out_of_bounds: return "out_of_bounds";
    case Errc::shape_mismatch: return "shape_mismatch";
    case Errc::infeasible: return "infeasible";
    case Errc::out_of_range: return "out_of_range";
    case Errc::checksum_mismatch: return "checksum_mismatch";
    case Errc::single_class: return "single_class";
  }
  return "unknown";
}

constexpr std::string_view to_string(ErrorCategory cat) noexcept {
  switch (cat) {
    case ErrorCategory::argument: return "argument";
    case ErrorCategory::config: return "config";
    case ErrorCategory::io: return "io";
    case ErrorCategory::format: return "format";
    case ErrorCategory::verification: return "verification";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  Errc code_;
};

/// Exit codes of the command-line tool: 0 ok, 2 config, 3 I/O, 4 verification.
constexpr int exit_code_for(ErrorCategory cat) noexcept {
  switch (cat) {
    case ErrorCategory::config:
    case ErrorCategory::argument:
      return 2;
    case ErrorCategory::io:
    case ErrorCategory::format:
      return 3;
    case ErrorCategory::verification:
      return 4;
  }
  return 1;
}

}  // namespace genesis
