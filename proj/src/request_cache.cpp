// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include "emopro/request_cache.hpp"

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include "emopro/error.hpp"
#include "emopro/hashing.hpp"

namespace emopro {

namespace {

// Record file layout: one header line "emopro-cache v1 <key> <created_at>",
// then the raw response bytes.
constexpr std::string_view kMagic = "emopro-cache v1";

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RequestCache::RequestCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(Errc::io, "cannot create cache dir " + dir_.string());
  }
}

std::string RequestCache::make_key(std::string_view ns, std::string_view model_id,
                                   std::string_view request_bytes) {
  std::string material;
  material.reserve(ns.size() + model_id.size() + request_bytes.size() + 2);
  material.append(ns).push_back('\n');
  material.append(model_id).push_back('\n');
  material.append(request_bytes);
  return sha256_hex(material);
}

std::filesystem::path RequestCache::path_for(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".rec");
}

std::optional<CacheRecord> RequestCache::get(const std::string& key) const {
  {
    std::lock_guard lock(mutex_);
    if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  }
  if (dir_.empty()) return std::nullopt;

  std::ifstream in(path_for(key), std::ios::binary);
  if (!in) return std::nullopt;
  std::string header;
  if (!std::getline(in, header) || header.rfind(kMagic, 0) != 0) return std::nullopt;
  std::istringstream fields(header.substr(kMagic.size()));
  CacheRecord record;
  fields >> record.key >> record.created_at;
  if (record.key != key) return std::nullopt;
  std::ostringstream body;
  body << in.rdbuf();
  record.response = std::move(body).str();

  std::lock_guard lock(mutex_);
  memory_.emplace(key, record);
  return record;
}

void RequestCache::put(const std::string& key, std::string_view response) {
  CacheRecord record{key, std::string(response), utc_now()};
  {
    std::lock_guard lock(mutex_);
    if (memory_.contains(key)) return;
    memory_.emplace(key, record);
  }
  if (dir_.empty()) return;

  const auto final_path = path_for(key);
  std::error_code ec;
  if (std::filesystem::exists(final_path, ec)) return;
  std::filesystem::create_directories(final_path.parent_path(), ec);

  std::ostringstream tmp_name;
  tmp_name << final_path.filename().string() << ".tmp." << ::getpid() << "."
           << std::this_thread::get_id();
  const auto tmp_path = final_path.parent_path() / tmp_name.str();
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write cache record " + tmp_path.string());
    out << kMagic << ' ' << key << ' ' << record.created_at << '\n';
    out.write(response.data(), static_cast<std::streamsize>(response.size()));
    if (!out) throw Error(Errc::io, "cannot write cache record " + tmp_path.string());
  }
  std::filesystem::rename(tmp_path, final_path, ec);
  if (ec) {
    std::filesystem::remove(tmp_path, ec);
    throw Error(Errc::io, "cannot publish cache record " + final_path.string());
  }
}

}  // namespace emopro
