// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include <httplib.h>

#include <cmath>

#include "emopro/backend_client.hpp"
#include "emopro/error.hpp"

namespace emopro {

namespace {

struct SplitUrl {
  std::string scheme_host_port;
  std::string prefix;
};

SplitUrl split_base_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(Errc::invalid_argument, "backend URL '" + base_url + "' has no scheme");
  }
  const auto path_start = base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {base_url, ""};
  std::string prefix = base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base_url.substr(0, path_start), prefix};
}

}  // namespace

std::string HttpTransport::send(BackendRole role, const Endpoint& endpoint,
                                const std::string& body) {
  if (endpoint.base_url.empty()) {
    throw Error(Errc::invalid_argument,
                "backend role '" + std::string(to_string(role)) + "' has no URL");
  }
  const auto url = split_base_url(endpoint.base_url);
  httplib::Client client(url.scheme_host_port);
  const auto secs = static_cast<time_t>(std::floor(endpoint.timeout_s));
  const auto usecs = static_cast<time_t>((endpoint.timeout_s - secs) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  httplib::Headers headers;
  if (!endpoint.bearer_token.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint.bearer_token);
  }

  const std::string path = url.prefix + std::string(endpoint_path(role));
  auto res = client.Post(path, headers, body, "application/json");
  if (!res) {
    throw Error(Errc::transport, "POST " + endpoint.base_url + path + ": " +
                                     httplib::to_string(res.error()));
  }
  if (res->status >= 500 || res->status == 429) {
    throw Error(Errc::transport,
                "POST " + path + " returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw Error(Errc::schema, "POST " + path + " returned HTTP " +
                                  std::to_string(res->status) + ": " + res->body);
  }
  return res->body;
}

}  // namespace emopro
