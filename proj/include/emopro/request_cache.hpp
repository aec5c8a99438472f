// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace emopro {

struct CacheRecord {
  std::string key;
  std::string response;  // exact bytes as received
  std::string created_at;
};

/// Content-addressed store of backend responses. Records live under
/// `<dir>/<key[0:2]>/<key>.rec` and are never rewritten once present;
/// writes go to a temp file that is renamed into place. With an empty
/// directory the cache is process-local memory.
class RequestCache {
 public:
  explicit RequestCache(std::filesystem::path dir = {});

  /// sha256(namespace, model_id, canonical request bytes).
  static std::string make_key(std::string_view ns, std::string_view model_id,
                              std::string_view request_bytes);

  std::optional<CacheRecord> get(const std::string& key) const;

  /// No-op if the key already exists.
  void put(const std::string& key, std::string_view response);

  const std::filesystem::path& dir() const { return dir_; }
  bool persistent() const { return !dir_.empty(); }

 private:
  std::filesystem::path path_for(const std::string& key) const;

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, CacheRecord> memory_;
};

}  // namespace emopro
