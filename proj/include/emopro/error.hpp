// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace emopro {

enum class Errc {
  io,
  parse,
  duplicate_id,
  empty_pool,
  corrupt_audio,
  unsupported_audio,
  invalid_argument,
  insufficient_voicing,
  too_few_points,
  transport,
  schema,
  range,
  fixture_key_missing,
  incomplete_result,
  schema_version,
};

std::string_view to_string(Errc code);

/// All engine failures surface as `Error`; `code()` tells callers which
/// recovery path applies (e.g. transport errors are retryable, schema
/// and range errors are protocol violations and are not).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

  bool is_protocol_error() const noexcept {
    return code_ == Errc::schema || code_ == Errc::range;
  }

 private:
  Errc code_;
};

}  // namespace emopro
