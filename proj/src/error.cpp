// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include "emopro/error.hpp"

namespace emopro {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::io: return "io";
    case Errc::parse: return "parse";
    case Errc::duplicate_id: return "duplicate_id";
    case Errc::empty_pool: return "empty_pool";
    case Errc::corrupt_audio: return "corrupt_audio";
    case Errc::unsupported_audio: return "unsupported_audio";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::insufficient_voicing: return "insufficient_voicing";
    case Errc::too_few_points: return "too_few_points";
    case Errc::transport: return "transport";
    case Errc::schema: return "schema";
    case Errc::range: return "range";
    case Errc::fixture_key_missing: return "fixture_key_missing";
    case Errc::incomplete_result: return "incomplete_result";
    case Errc::schema_version: return "schema_version";
  }
  return "unknown";
}

}  // namespace emopro
