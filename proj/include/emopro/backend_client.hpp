// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <semaphore>
#include <string>

#include "emopro/backend_protocol.hpp"
#include "emopro/request_cache.hpp"

namespace emopro {

/// Moves one request envelope to a backend and returns the raw response
/// body. Implementations throw Error(Errc::transport) for failures worth
/// retrying (connection errors, timeouts, 5xx, 429) and Error(Errc::schema)
/// for responses that will not improve on retry.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string send(BackendRole role, const Endpoint& endpoint,
                           const std::string& body) = 0;
};

/// HTTP POST of the envelope to `endpoint.base_url + endpoint_path(role)`.
class HttpTransport final : public Transport {
 public:
  std::string send(BackendRole role, const Endpoint& endpoint,
                   const std::string& body) override;
};

/// Thread-safe scorer client shared by every stage. A call is answered
/// from the cache when the same (role, model_id, request) was seen before;
/// otherwise it goes over the transport with bounded retries, the response
/// is validated, and only then cached.
class BackendClient {
 public:
  static constexpr std::ptrdiff_t kMaxInFlightLimit = 1024;

  using Sleeper = std::function<void(std::chrono::duration<double>)>;

  BackendClient(BackendSet backends, std::shared_ptr<Transport> transport,
                std::shared_ptr<RequestCache> cache, std::size_t max_in_flight = 8);

  /// Returns the validated `result` object.
  /// Errors: Errc::transport after retries are exhausted, Errc::schema,
  /// Errc::range, Errc::invalid_argument (role not configured).
  Json call(BackendRole role, const Json& payload);

  bool has(BackendRole role) const { return backends_.has(role); }
  const BackendSet& backends() const { return backends_; }
  RequestCache& cache() { return *cache_; }

  std::size_t wire_calls() const { return wire_calls_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }

  /// Replaces the backoff sleep (tests use a no-op).
  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

 private:
  BackendSet backends_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<RequestCache> cache_;
  std::counting_semaphore<kMaxInFlightLimit> in_flight_;
  std::atomic<std::size_t> wire_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
  Sleeper sleeper_;
};

}  // namespace emopro
