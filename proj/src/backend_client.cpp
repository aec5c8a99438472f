// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include "emopro/backend_client.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <thread>

#include "emopro/error.hpp"

namespace emopro {

namespace {

std::ptrdiff_t clamp_in_flight(std::size_t n) {
  return std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n), 1,
                                    BackendClient::kMaxInFlightLimit);
}

}  // namespace

BackendClient::BackendClient(BackendSet backends, std::shared_ptr<Transport> transport,
                             std::shared_ptr<RequestCache> cache,
                             std::size_t max_in_flight)
    : backends_(std::move(backends)),
      transport_(std::move(transport)),
      cache_(cache ? std::move(cache) : std::make_shared<RequestCache>()),
      in_flight_(clamp_in_flight(max_in_flight)),
      sleeper_([](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); }) {
  for (const auto& [role, ep] : backends_.endpoints) {
    if (ep.model_id.empty()) {
      throw Error(Errc::invalid_argument,
                  "backend role '" + std::string(to_string(role)) + "' has no model_id");
    }
  }
}

Json BackendClient::call(BackendRole role, const Json& payload) {
  const Endpoint& endpoint = backends_.at(role);
  const Json envelope = make_request_envelope(role, endpoint.model_id, payload);
  const std::string body = envelope.dump();
  const std::string key = RequestCache::make_key(to_string(role), endpoint.model_id, body);

  if (auto hit = cache_->get(key)) {
    ++cache_hits_;
    return parse_response_envelope(role, hit->response, &payload);
  }
  if (!transport_) {
    throw Error(Errc::transport, "no transport configured and cache miss for " +
                                     std::string(to_string(role)));
  }

  std::string response;
  auto backoff = std::chrono::duration<double>(endpoint.backoff_s);
  for (int attempt = 0;; ++attempt) {
    try {
      in_flight_.acquire();
      struct Release {
        std::counting_semaphore<kMaxInFlightLimit>& s;
        ~Release() { s.release(); }
      } release{in_flight_};
      ++wire_calls_;
      response = transport_->send(role, endpoint, body);
      break;
    } catch (const Error& e) {
      if (e.code() != Errc::transport || attempt >= endpoint.retries) {
        if (e.code() == Errc::transport) {
          throw Error(Errc::transport, std::string(to_string(role)) + " failed after " +
                                           std::to_string(attempt + 1) +
                                           " attempts: " + e.what());
        }
        throw;
      }
      spdlog::debug("{} attempt {} failed: {}", to_string(role), attempt + 1, e.what());
      sleeper_(backoff);
      backoff *= 2.0;
    }
  }

  Json result = parse_response_envelope(role, response, &payload);
  cache_->put(key, response);
  return result;
}

}  // namespace emopro
