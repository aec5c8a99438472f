// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <thread>

#include "emopro/backend_client.hpp"
#include "emopro/backend_protocol.hpp"

namespace httplib {
class Server;
}

namespace emopro {

/// Deterministic stand-in for every backend role, driven by a JSON fixture
/// (format in docs/protocol.md). Responses depend only on the fixture and
/// the request bytes.
///
///   tts        "tone": sine whose pitch is derived from ref.candidate;
///              "echo": the prompt audio. Either way the synthesized text
///              is stamped into the WAV's INFO comment.
///   asr        "echo": returns the stamped text, optionally with
///              characters dropped per candidate; "table": lookups.
///   embeddings seeded unit vectors keyed by (speaker, emotion) by default,
///              explicit `vectors` override, optional per-candidate jitter
///              on the synthesized side.
///   quality, coherence, semantic: table lookups with optional default or
///              seeded ranges.
class MockBackend {
 public:
  explicit MockBackend(Json fixture);
  static std::shared_ptr<MockBackend> from_file(const std::filesystem::path& path);

  /// Full request envelope in, response envelope out. Throws Error with
  /// Errc::fixture_key_missing, Errc::schema or (injected) Errc::transport.
  std::string handle(BackendRole role, const std::string& request_body);

  /// Role-level entry point used by handle().
  Json respond(BackendRole role, const Json& payload) const;

  std::size_t call_count() const { return calls_.load(); }
  std::size_t call_count(BackendRole role) const;
  const Json& fixture() const { return fixture_; }

 private:
  Json tts(const Json& payload) const;
  Json asr(const Json& payload) const;
  Json embedding(BackendRole role, const Json& payload) const;
  Json scalar_score(BackendRole role, const Json& payload) const;
  Json semantic(const Json& payload) const;
  bool should_fail(BackendRole role, const Json& payload) const;

  Json fixture_;
  std::uint64_t seed_;
  std::atomic<std::size_t> calls_{0};
  std::array<std::atomic<std::size_t>, kAllRoles.size()> role_calls_{};
};

/// In-process transport straight into a MockBackend.
class MockTransport final : public Transport {
 public:
  explicit MockTransport(std::shared_ptr<MockBackend> backend)
      : backend_(std::move(backend)) {}
  std::string send(BackendRole role, const Endpoint& endpoint,
                   const std::string& body) override;

 private:
  std::shared_ptr<MockBackend> backend_;
};

/// Serves a MockBackend over the wire protocol on 127.0.0.1.
class MockServer {
 public:
  explicit MockServer(std::shared_ptr<MockBackend> backend);
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  int start(int port = 0, const std::string& host = "127.0.0.1");
  /// Blocks serving on the calling thread until stop().
  void listen_blocking(int port, const std::string& host = "127.0.0.1");
  void stop();

  int port() const { return port_; }
  std::string base_url() const;
  /// Requests received on role endpoints (health checks excluded).
  std::size_t request_count() const { return requests_.load(); }

 private:
  void install_routes();

  std::shared_ptr<MockBackend> backend_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  std::string host_;
  std::atomic<std::size_t> requests_{0};
};

}  // namespace emopro
