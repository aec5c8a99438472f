// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace emopro {

using Json = nlohmann::json;

enum class BackendRole {
  tts,
  asr,
  speaker_embed_a,
  speaker_embed_b,
  emotion_embed,
  quality,
  coherence,
  semantic,
};

inline constexpr std::array<BackendRole, 8> kAllRoles = {
    BackendRole::tts,           BackendRole::asr,
    BackendRole::speaker_embed_a, BackendRole::speaker_embed_b,
    BackendRole::emotion_embed, BackendRole::quality,
    BackendRole::coherence,     BackendRole::semantic};

std::string_view to_string(BackendRole role);
BackendRole parse_role(std::string_view text);

/// HTTP path of the role's endpoint, e.g. "/v1/embed/speaker_a".
std::string_view endpoint_path(BackendRole role);
std::optional<BackendRole> role_from_path(std::string_view path);

inline constexpr std::string_view kHealthPath = "/v1/health";

/// Score ranges enforced on responses.
inline constexpr double kQualityMin = 1.0;
inline constexpr double kQualityMax = 5.0;

struct Endpoint {
  std::string base_url;     // e.g. "http://127.0.0.1:8700"
  double timeout_s = 30.0;
  int retries = 3;          // extra attempts after the first
  double backoff_s = 0.2;   // doubled after each failed attempt
  std::string model_id;
  std::string bearer_token; // sent as "Authorization: Bearer ..." when set
};

struct BackendSet {
  std::map<BackendRole, Endpoint> endpoints;

  const Endpoint& at(BackendRole role) const;
  bool has(BackendRole role) const { return endpoints.contains(role); }
};

/// `{"role", "model_id", "payload"}`.
Json make_request_envelope(BackendRole role, const std::string& model_id,
                           const Json& payload);

/// Checks a request payload against the role schema; throws
/// Error(Errc::schema) naming the offending field.
void validate_request(BackendRole role, const Json& payload);

/// Checks a response `result` object against the role schema and ranges.
/// `request` enables cross-checks such as the semantic score count.
/// Throws Error(Errc::schema) or Error(Errc::range).
void validate_result(BackendRole role, const Json& result, const Json* request = nullptr);

/// Parses `{"role", "model_id", "result"}` or `{"error": {...}}`, validates the
/// result and returns it.
Json parse_response_envelope(BackendRole role, std::string_view body,
                             const Json* request = nullptr);

Json make_response_envelope(BackendRole role, const std::string& model_id,
                            const Json& result);
Json make_error_envelope(std::string_view code, std::string_view message);

}  // namespace emopro
