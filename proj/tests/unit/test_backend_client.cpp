// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <atomic>
#include <mutex>
#include <thread>

#include "emopro/backend_client.hpp"
#include "emopro/error.hpp"
#include "emopro/hashing.hpp"
#include "emopro/wav.hpp"
#include "emopro/mock_backend.hpp"
#include "emopro/parallel.hpp"
#include "fixtures.hpp"

using namespace emopro;

namespace {

// Scripted transport: fails `failures` times with `code`, then replies.
class ScriptedTransport : public Transport {
 public:
  ScriptedTransport(int failures, Errc code, std::string reply)
      : failures_(failures), code_(code), reply_(std::move(reply)) {}

  std::string send(BackendRole, const Endpoint&, const std::string&) override {
    ++calls;
    if (failures_-- > 0) throw Error(code_, "scripted failure");
    return reply_;
  }
  std::atomic<int> calls{0};

 private:
  std::atomic<int> failures_;
  Errc code_;
  std::string reply_;
};

// Records the peak number of concurrent sends.
class SlowTransport : public Transport {
 public:
  std::string send(BackendRole role, const Endpoint& ep, const std::string&) override {
    const int now = ++active;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    --active;
    return make_response_envelope(role, ep.model_id, {{"score", 2.0}}).dump();
  }
  std::atomic<int> active{0};
  std::atomic<int> peak{0};
};

BackendSet one_role(BackendRole role, int retries = 3) {
  BackendSet set;
  Endpoint ep;
  ep.model_id = "m";
  ep.retries = retries;
  ep.backoff_s = 0.2;
  set.endpoints.emplace(role, ep);
  return set;
}

std::string quality_reply(double score) {
  return make_response_envelope(BackendRole::quality, "m", {{"score", score}}).dump();
}

const Json kCoherencePayload = {{"text", "t"}, {"emotion", "happy"}, {"rubric", "r"}};

}  // namespace

TEST_CASE("identical requests hit the wire once") {
  auto transport = std::make_shared<ScriptedTransport>(
      0, Errc::transport,
      make_response_envelope(BackendRole::coherence, "m", {{"score", 0.8}}).dump());
  BackendClient client(one_role(BackendRole::coherence), transport, nullptr);
  CHECK(client.call(BackendRole::coherence, kCoherencePayload)["score"] == 0.8);
  CHECK(client.call(BackendRole::coherence, kCoherencePayload)["score"] == 0.8);
  CHECK(transport->calls == 1);
  CHECK(client.wire_calls() == 1);
  CHECK(client.cache_hits() == 1);
  Json other = kCoherencePayload;
  other["text"] = "different";
  client.call(BackendRole::coherence, other);
  CHECK(transport->calls == 2);
}

TEST_CASE("transport failures retry with exponential backoff") {
  auto transport = std::make_shared<ScriptedTransport>(2, Errc::transport, quality_reply(3.0));
  BackendClient client(one_role(BackendRole::quality), transport, nullptr);
  std::vector<double> sleeps;
  client.set_sleeper([&](std::chrono::duration<double> d) { sleeps.push_back(d.count()); });
  const Json payload = {{"audio", "x"}};
  CHECK(client.call(BackendRole::quality, payload)["score"] == 3.0);
  CHECK(transport->calls == 3);
  REQUIRE(sleeps.size() == 2);
  CHECK(sleeps[0] == doctest::Approx(0.2));
  CHECK(sleeps[1] == doctest::Approx(0.4));
}

TEST_CASE("retries are bounded") {
  auto transport = std::make_shared<ScriptedTransport>(100, Errc::transport, quality_reply(3.0));
  BackendClient client(one_role(BackendRole::quality, 3), transport, nullptr);
  client.set_sleeper([](auto) {});
  try {
    client.call(BackendRole::quality, {{"audio", "x"}});
    FAIL("expected transport error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::transport);
    CHECK(std::string(e.what()).find("4 attempts") != std::string::npos);
  }
  CHECK(transport->calls == 4);
}

TEST_CASE("protocol errors are not retried and not cached") {
  auto bad = std::make_shared<ScriptedTransport>(0, Errc::transport, quality_reply(5.7));
  BackendClient client(one_role(BackendRole::quality), bad, nullptr);
  client.set_sleeper([](auto) {});
  for (int i = 0; i < 2; ++i) {
    try {
      client.call(BackendRole::quality, {{"audio", "x"}});
      FAIL("expected range error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::range);
    }
  }
  CHECK(bad->calls == 2);

  auto schema = std::make_shared<ScriptedTransport>(5, Errc::schema, quality_reply(3.0));
  BackendClient client2(one_role(BackendRole::quality), schema, nullptr);
  CHECK_THROWS_AS(client2.call(BackendRole::quality, {{"audio", "x"}}), Error);
  CHECK(schema->calls == 1);
}

TEST_CASE("unconfigured roles and missing model ids") {
  BackendClient client(one_role(BackendRole::quality), nullptr, nullptr);
  try {
    client.call(BackendRole::tts, {});
    FAIL("expected invalid_argument");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_argument);
  }
  BackendSet set = one_role(BackendRole::asr);
  set.endpoints[BackendRole::asr].model_id.clear();
  CHECK_THROWS_AS(BackendClient(set, nullptr, nullptr), Error);
}

TEST_CASE("warm cache serves with no transport at all") {
  auto cache = std::make_shared<RequestCache>();
  auto transport = std::make_shared<ScriptedTransport>(0, Errc::transport, quality_reply(4.5));
  BackendClient warm(one_role(BackendRole::quality), transport, cache);
  warm.call(BackendRole::quality, {{"audio", "x"}});
  BackendClient offline(one_role(BackendRole::quality), nullptr, cache);
  CHECK(offline.call(BackendRole::quality, {{"audio", "x"}})["score"] == 4.5);
  CHECK(offline.wire_calls() == 0);
  CHECK_THROWS_AS(offline.call(BackendRole::quality, {{"audio", "y"}}), Error);
}

TEST_CASE("in-flight cap holds under parallel load") {
  auto transport = std::make_shared<SlowTransport>();
  BackendClient client(one_role(BackendRole::quality), transport, nullptr, 3);
  parallel_for(40, 12, [&](std::size_t i) {
    client.call(BackendRole::quality, {{"audio", std::to_string(i)}});
  });
  CHECK(transport->peak.load() <= 3);
  CHECK(client.wire_calls() == 40);
}

TEST_CASE("HTTP transport against the mock server") {
  auto backend = std::make_shared<MockBackend>(Json{
      {"quality", {{"table", {{"c1", 3.2}}}}},
      {"coherence", {{"table", {{"c1", 0.8}}}}},
      {"fail", {{"asr", {"*"}}}}});
  MockServer server(backend);
  server.start();

  BackendSet set;
  for (BackendRole role : kAllRoles) {
    Endpoint ep;
    ep.base_url = server.base_url();
    ep.model_id = "mock";
    ep.retries = 1;
    ep.timeout_s = 5;
    set.endpoints.emplace(role, ep);
  }
  BackendClient client(set, std::make_shared<HttpTransport>(), nullptr);
  client.set_sleeper([](auto) {});

  const std::string audio =
      base64_encode(wav::encode(testing::sine(200.0, 0.2), 1, 16000));
  const Json ref = {{"candidate", "c1"}};
  CHECK(client.call(BackendRole::quality, {{"audio", audio}, {"ref", ref}})["score"] == 3.2);
  CHECK(client.call(BackendRole::coherence,
                    {{"text", "t"}, {"emotion", "happy"}, {"rubric", "r"}, {"ref", ref}})["score"] ==
        0.8);

  // 503 is retryable: two attempts, then a transport error.
  try {
    client.call(BackendRole::asr, {{"audio", audio}});
    FAIL("expected transport error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::transport);
  }
  // 404 (fixture key missing) is a protocol error, no retry.
  const auto before = server.request_count();
  try {
    client.call(BackendRole::quality, {{"audio", audio}, {"ref", {{"candidate", "zz"}}}});
    FAIL("expected schema error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::schema);
  }
  CHECK(server.request_count() == before + 1);

  // Unreachable host is a transport error.
  BackendSet dead = one_role(BackendRole::quality, 0);
  dead.endpoints[BackendRole::quality].base_url = "http://127.0.0.1:1";
  dead.endpoints[BackendRole::quality].timeout_s = 1;
  BackendClient dead_client(dead, std::make_shared<HttpTransport>(), nullptr);
  try {
    dead_client.call(BackendRole::quality, {{"audio", audio}});
    FAIL("expected transport error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::transport);
  }
  server.stop();
}
