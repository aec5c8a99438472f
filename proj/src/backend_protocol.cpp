// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include "emopro/backend_protocol.hpp"

#include <cmath>

#include "emopro/error.hpp"
#include "emopro/hashing.hpp"
#include "emopro/wav.hpp"

namespace emopro {

namespace {

std::string label(BackendRole role, std::string_view side) {
  return std::string(to_string(role)) + " " + std::string(side);
}

const Json& require_field(const Json& obj, const char* field, BackendRole role,
                          std::string_view side) {
  if (!obj.is_object()) {
    throw Error(Errc::schema, label(role, side) + " is not a JSON object");
  }
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw Error(Errc::schema,
                "missing field '" + std::string(field) + "' in " + label(role, side));
  }
  return *it;
}

const Json& require_string(const Json& obj, const char* field, BackendRole role,
                           std::string_view side) {
  const auto& v = require_field(obj, field, role, side);
  if (!v.is_string()) {
    throw Error(Errc::schema,
                "field '" + std::string(field) + "' in " + label(role, side) +
                    " must be a string");
  }
  return v;
}

double require_number(const Json& obj, const char* field, BackendRole role,
                      std::string_view side) {
  const auto& v = require_field(obj, field, role, side);
  if (!v.is_number()) {
    throw Error(Errc::schema,
                "field '" + std::string(field) + "' in " + label(role, side) +
                    " must be a number");
  }
  const double d = v.get<double>();
  if (!std::isfinite(d)) {
    throw Error(Errc::range, "field '" + std::string(field) + "' in " +
                                 label(role, side) + " is not finite");
  }
  return d;
}

void require_in_range(double v, double lo, double hi, const char* field, BackendRole role) {
  if (v < lo || v > hi) {
    throw Error(Errc::range, std::string(to_string(role)) + " " + field + " " +
                                 std::to_string(v) + " outside [" + std::to_string(lo) +
                                 ", " + std::to_string(hi) + "]");
  }
}

void require_audio(const Json& obj, const char* field, BackendRole role,
                   std::string_view side) {
  const auto& v = require_string(obj, field, role, side);
  try {
    (void)wav::decode(base64_decode(v.get_ref<const std::string&>()));
  } catch (const Error& e) {
    throw Error(Errc::schema, "field '" + std::string(field) + "' in " +
                                  label(role, side) + " is not base64 WAV: " + e.what());
  }
}

}  // namespace

std::string_view to_string(BackendRole role) {
  switch (role) {
    case BackendRole::tts: return "tts";
    case BackendRole::asr: return "asr";
    case BackendRole::speaker_embed_a: return "speaker_embed_a";
    case BackendRole::speaker_embed_b: return "speaker_embed_b";
    case BackendRole::emotion_embed: return "emotion_embed";
    case BackendRole::quality: return "quality";
    case BackendRole::coherence: return "coherence";
    case BackendRole::semantic: return "semantic";
  }
  return "tts";
}

BackendRole parse_role(std::string_view text) {
  for (BackendRole role : kAllRoles) {
    if (to_string(role) == text) return role;
  }
  throw Error(Errc::parse, "unknown backend role '" + std::string(text) + "'");
}

std::string_view endpoint_path(BackendRole role) {
  switch (role) {
    case BackendRole::tts: return "/v1/tts";
    case BackendRole::asr: return "/v1/asr";
    case BackendRole::speaker_embed_a: return "/v1/embed/speaker_a";
    case BackendRole::speaker_embed_b: return "/v1/embed/speaker_b";
    case BackendRole::emotion_embed: return "/v1/embed/emotion";
    case BackendRole::quality: return "/v1/quality";
    case BackendRole::coherence: return "/v1/coherence";
    case BackendRole::semantic: return "/v1/semantic";
  }
  return "/v1/tts";
}

std::optional<BackendRole> role_from_path(std::string_view path) {
  for (BackendRole role : kAllRoles) {
    if (endpoint_path(role) == path) return role;
  }
  return std::nullopt;
}

const Endpoint& BackendSet::at(BackendRole role) const {
  auto it = endpoints.find(role);
  if (it == endpoints.end()) {
    throw Error(Errc::invalid_argument,
                "backend role '" + std::string(to_string(role)) + "' is not configured");
  }
  return it->second;
}

Json make_request_envelope(BackendRole role, const std::string& model_id,
                           const Json& payload) {
  return Json{{"role", to_string(role)}, {"model_id", model_id}, {"payload", payload}};
}

void validate_request(BackendRole role, const Json& payload) {
  constexpr std::string_view side = "request";
  switch (role) {
    case BackendRole::tts:
      require_audio(payload, "prompt_audio", role, side);
      require_string(payload, "prompt_text", role, side);
      require_string(payload, "text", role, side);
      break;
    case BackendRole::asr:
    case BackendRole::speaker_embed_a:
    case BackendRole::speaker_embed_b:
    case BackendRole::emotion_embed:
    case BackendRole::quality:
      require_audio(payload, "audio", role, side);
      break;
    case BackendRole::coherence:
      require_string(payload, "text", role, side);
      require_string(payload, "emotion", role, side);
      require_string(payload, "rubric", role, side);
      break;
    case BackendRole::semantic: {
      require_string(payload, "target_text", role, side);
      const auto& texts = require_field(payload, "candidate_texts", role, side);
      if (!texts.is_array() || texts.empty()) {
        throw Error(Errc::schema, "field 'candidate_texts' in semantic request must be "
                                  "a non-empty array");
      }
      for (const auto& t : texts) {
        if (!t.is_string()) {
          throw Error(Errc::schema, "field 'candidate_texts' must hold strings");
        }
      }
      break;
    }
  }
  if (payload.contains("ref") && !payload["ref"].is_object()) {
    throw Error(Errc::schema, "field 'ref' in " + label(role, side) + " must be an object");
  }
}

void validate_result(BackendRole role, const Json& result, const Json* request) {
  constexpr std::string_view side = "response";
  switch (role) {
    case BackendRole::tts:
      require_audio(result, "audio", role, side);
      break;
    case BackendRole::asr:
      require_string(result, "text", role, side);
      break;
    case BackendRole::speaker_embed_a:
    case BackendRole::speaker_embed_b:
    case BackendRole::emotion_embed: {
      const auto& emb = require_field(result, "embedding", role, side);
      if (!emb.is_array() || emb.empty()) {
        throw Error(Errc::schema, "field 'embedding' in " + label(role, side) +
                                      " must be a non-empty array");
      }
      for (const auto& v : emb) {
        if (!v.is_number()) {
          throw Error(Errc::schema, "field 'embedding' must hold numbers");
        }
        if (!std::isfinite(v.get<double>())) {
          throw Error(Errc::range, "embedding holds a non-finite value");
        }
      }
      break;
    }
    case BackendRole::quality:
      require_in_range(require_number(result, "score", role, side), kQualityMin,
                       kQualityMax, "score", role);
      break;
    case BackendRole::coherence:
      require_in_range(require_number(result, "score", role, side), 0.0, 1.0, "score",
                       role);
      break;
    case BackendRole::semantic: {
      const auto& scores = require_field(result, "scores", role, side);
      if (!scores.is_array()) {
        throw Error(Errc::schema, "field 'scores' in semantic response must be an array");
      }
      for (const auto& v : scores) {
        if (!v.is_number()) throw Error(Errc::schema, "field 'scores' must hold numbers");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw Error(Errc::range, "semantic score is not finite");
        require_in_range(d, 0.0, 1.0, "score", role);
      }
      if (request && request->contains("candidate_texts") &&
          scores.size() != (*request)["candidate_texts"].size()) {
        throw Error(Errc::schema, "semantic response has " +
                                      std::to_string(scores.size()) + " scores for " +
                                      std::to_string((*request)["candidate_texts"].size()) +
                                      " candidate texts");
      }
      break;
    }
  }
}

Json parse_response_envelope(BackendRole role, std::string_view body, const Json* request) {
  Json doc;
  try {
    doc = Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw Error(Errc::schema, std::string(to_string(role)) +
                                  " response is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) {
    throw Error(Errc::schema, std::string(to_string(role)) + " response is not an object");
  }
  if (auto it = doc.find("error"); it != doc.end()) {
    const auto message = it->is_object() ? it->value("message", std::string("?"))
                                         : it->dump();
    throw Error(Errc::schema,
                std::string(to_string(role)) + " backend returned error: " + message);
  }
  const auto& role_field = require_string(doc, "role", role, "response");
  if (role_field.get<std::string>() != to_string(role)) {
    throw Error(Errc::schema, "response role '" + role_field.get<std::string>() +
                                  "' does not match request role '" +
                                  std::string(to_string(role)) + "'");
  }
  require_string(doc, "model_id", role, "response");
  const auto& result = require_field(doc, "result", role, "response");
  validate_result(role, result, request);
  return result;
}

Json make_response_envelope(BackendRole role, const std::string& model_id,
                            const Json& result) {
  return Json{{"role", to_string(role)}, {"model_id", model_id}, {"result", result}};
}

Json make_error_envelope(std::string_view code, std::string_view message) {
  return Json{{"error", {{"code", code}, {"message", message}}}};
}

}  // namespace emopro
