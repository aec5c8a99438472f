// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <limits>
#include <set>

#include "emopro/backend_protocol.hpp"
#include "emopro/error.hpp"
#include "emopro/hashing.hpp"
#include "emopro/wav.hpp"
#include "fixtures.hpp"

using namespace emopro;

namespace {

std::string audio_b64() {
  return base64_encode(wav::encode(testing::sine(200.0, 0.1), 1, 16000));
}

Error error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an emopro::Error");
  return Error(Errc::io, "");
}

bool mentions(const Error& e, const std::string& s) {
  return std::string(e.what()).find(s) != std::string::npos;
}

}  // namespace

TEST_CASE("roles, names and paths are bijective") {
  std::set<std::string> names, paths;
  for (BackendRole r : kAllRoles) {
    CHECK(parse_role(to_string(r)) == r);
    CHECK(role_from_path(endpoint_path(r)) == r);
    names.insert(std::string(to_string(r)));
    paths.insert(std::string(endpoint_path(r)));
  }
  CHECK(names.size() == 8);
  CHECK(paths.size() == 8);
  CHECK(endpoint_path(BackendRole::speaker_embed_b) == "/v1/embed/speaker_b");
  CHECK_FALSE(role_from_path("/v1/health").has_value());
  CHECK_THROWS_AS(parse_role("vocoder"), Error);
}

TEST_CASE("request schemas") {
  const auto a = audio_b64();
  CHECK_NOTHROW(validate_request(BackendRole::tts,
                                 {{"prompt_audio", a}, {"prompt_text", "p"}, {"text", "t"}}));
  const auto missing = error_of([&] {
    validate_request(BackendRole::tts, {{"prompt_audio", a}, {"text", "t"}});
  });
  CHECK(missing.code() == Errc::schema);
  CHECK(mentions(missing, "prompt_text"));

  CHECK(error_of([] { validate_request(BackendRole::asr, {{"audio", "bm90IGEgd2F2"}}); })
            .code() == Errc::schema);
  CHECK(error_of([&] { validate_request(BackendRole::quality, {{"audio", a}, {"ref", 3}}); })
            .code() == Errc::schema);
  CHECK_NOTHROW(validate_request(BackendRole::coherence,
                                 {{"text", "t"}, {"emotion", "happy"}, {"rubric", "r"}}));
  CHECK_NOTHROW(validate_request(BackendRole::semantic,
                                 {{"target_text", "t"}, {"candidate_texts", {"a", "b"}}}));
  CHECK(error_of([] {
          validate_request(BackendRole::semantic,
                           {{"target_text", "t"}, {"candidate_texts", Json::array()}});
        }).code() == Errc::schema);
}

TEST_CASE("result schemas and ranges") {
  CHECK_NOTHROW(validate_result(BackendRole::quality, {{"score", 1.0}}));
  CHECK_NOTHROW(validate_result(BackendRole::quality, {{"score", 5.0}}));
  CHECK(error_of([] { validate_result(BackendRole::quality, {{"score", 5.7}}); }).code() ==
        Errc::range);
  CHECK(error_of([] { validate_result(BackendRole::quality, {{"score", 0.99}}); }).code() ==
        Errc::range);
  CHECK(error_of([] { validate_result(BackendRole::coherence, {{"score", 1.3}}); }).code() ==
        Errc::range);
  CHECK(error_of([] { validate_result(BackendRole::coherence, {{"score", "0.5"}}); }).code() ==
        Errc::schema);
  const auto no_score = error_of([] { validate_result(BackendRole::quality, {{"mos", 3}}); });
  CHECK(no_score.code() == Errc::schema);
  CHECK(mentions(no_score, "score"));

  CHECK_NOTHROW(validate_result(BackendRole::emotion_embed, {{"embedding", {0.1, -0.2}}}));
  CHECK(error_of([] {
          validate_result(BackendRole::speaker_embed_a, {{"embedding", Json::array()}});
        }).code() == Errc::schema);
  CHECK(error_of([] {
          validate_result(BackendRole::speaker_embed_a, {{"embedding", {1, "x"}}});
        }).code() == Errc::schema);

  const Json req = {{"target_text", "t"}, {"candidate_texts", {"a", "b"}}};
  CHECK_NOTHROW(validate_result(BackendRole::semantic, {{"scores", {0.0, 1.0}}}, &req));
  CHECK(error_of([&] { validate_result(BackendRole::semantic, {{"scores", {0.5}}}, &req); })
            .code() == Errc::schema);
  CHECK(error_of([&] {
          validate_result(BackendRole::semantic, {{"scores", {0.5, -0.1}}}, &req);
        }).code() == Errc::range);

  CHECK_NOTHROW(validate_result(BackendRole::asr, {{"text", ""}}));
  CHECK(error_of([] { validate_result(BackendRole::tts, {{"audio", "AAAA"}}); }).code() ==
        Errc::schema);
}

TEST_CASE("envelopes") {
  const Json env = make_request_envelope(BackendRole::quality, "dnsmos", {{"audio", "x"}});
  CHECK(env["role"] == "quality");
  CHECK(env["model_id"] == "dnsmos");
  CHECK(env["payload"]["audio"] == "x");

  const auto ok = make_response_envelope(BackendRole::quality, "dnsmos", {{"score", 3.2}});
  CHECK(parse_response_envelope(BackendRole::quality, ok.dump())["score"] == 3.2);

  CHECK(error_of([&] { parse_response_envelope(BackendRole::coherence, ok.dump()); }).code() ==
        Errc::schema);
  CHECK(error_of([] { parse_response_envelope(BackendRole::asr, "{oops"); }).code() ==
        Errc::schema);
  const auto err = make_error_envelope("transport", "model offline").dump();
  const auto e = error_of([&] { parse_response_envelope(BackendRole::asr, err); });
  CHECK(e.code() == Errc::schema);
  CHECK(mentions(e, "model offline"));
}

TEST_CASE("backend set lookups") {
  BackendSet set;
  set.endpoints[BackendRole::asr] = Endpoint{};
  CHECK(set.has(BackendRole::asr));
  CHECK_FALSE(set.has(BackendRole::tts));
  CHECK(error_of([&] { set.at(BackendRole::tts); }).code() == Errc::invalid_argument);
}
