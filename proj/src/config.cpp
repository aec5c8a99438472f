// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include "emopro/config.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>

#include "emopro/error.hpp"
#include "emopro/hashing.hpp"

namespace emopro {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
  throw Error(Errc::parse, "config key '" + key + "': '" + value + "' is not " + expected);
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "an integer");
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  // from_chars ignores the global locale.
  double out = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "a number");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "a boolean");
}

std::string format_double(double v) { return fmt::format("{}", v); }

const std::string kPolarityPrefix = "polarity.";
const std::string kModelPrefix = "model_id.";
const std::string kBackendPrefix = "backend.";
const std::string kUrlSuffix = ".url";

const std::set<std::string> kPathKeys = {"probes", "rubric", "mock_fixture", "cache_dir"};

}  // namespace

std::map<BackendRole, std::string> SelectionConfig::default_model_ids() {
  return {
      {BackendRole::tts, "cosyvoice-300m"},
      {BackendRole::asr, "paraformer-zh"},
      {BackendRole::speaker_embed_a, "resemblyzer"},
      {BackendRole::speaker_embed_b, "wavlm-base-plus-sv"},
      {BackendRole::emotion_embed, "emotion2vec-base"},
      {BackendRole::quality, "dnsmos-p835"},
      {BackendRole::coherence, "llm-coherence-rubric-v1"},
      {BackendRole::semantic, "stsb-distilroberta-base"},
  };
}

const std::vector<std::string>& SelectionConfig::keys() {
  static const std::vector<std::string> kKeys = [] {
    std::vector<std::string> keys = {
        "num_clusters", "m", "n_percent", "k", "seed",
        "pitch.frame_size_s", "pitch.hop_s", "pitch.f0_min", "pitch.f0_max",
        "pitch.yin_threshold", "pitch.min_voiced",
        "validate.min_duration_s", "validate.max_duration_s", "validate.max_clip_fraction",
        "probes", "rubric", "backend_url", "timeout_s", "retries", "backoff_s",
        "mock_fixture", "cache_dir", "max_in_flight", "probe_failure_tolerance",
        "audit_audio"};
    for (EmotionLabel e : kAllEmotions) keys.push_back(kPolarityPrefix + std::string(to_string(e)));
    for (BackendRole r : kAllRoles) {
      keys.push_back(kBackendPrefix + std::string(to_string(r)) + kUrlSuffix);
      keys.push_back(kModelPrefix + std::string(to_string(r)));
    }
    return keys;
  }();
  return kKeys;
}

void SelectionConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "num_clusters") num_clusters = parse_integer<std::size_t>(key, value);
  else if (key == "m") m = parse_integer<std::size_t>(key, value);
  else if (key == "n_percent") n_percent = parse_double(key, value);
  else if (key == "k") k = parse_integer<std::size_t>(key, value);
  else if (key == "seed") seed = parse_integer<std::uint64_t>(key, value);
  else if (key == "pitch.frame_size_s") pitch.frame_size_s = parse_double(key, value);
  else if (key == "pitch.hop_s") pitch.hop_s = parse_double(key, value);
  else if (key == "pitch.f0_min") pitch.f0_min_hz = parse_double(key, value);
  else if (key == "pitch.f0_max") pitch.f0_max_hz = parse_double(key, value);
  else if (key == "pitch.yin_threshold") pitch.yin_threshold = parse_double(key, value);
  else if (key == "pitch.min_voiced") pitch.min_voiced = parse_integer<std::size_t>(key, value);
  else if (key == "validate.min_duration_s") validation.min_duration_s = parse_double(key, value);
  else if (key == "validate.max_duration_s") validation.max_duration_s = parse_double(key, value);
  else if (key == "validate.max_clip_fraction") validation.max_clip_fraction = parse_double(key, value);
  else if (key == "probes") probes_path = value;
  else if (key == "rubric") rubric_path = value;
  else if (key == "backend_url") backend_url = value;
  else if (key == "timeout_s") timeout_s = parse_double(key, value);
  else if (key == "retries") retries = parse_integer<int>(key, value);
  else if (key == "backoff_s") backoff_s = parse_double(key, value);
  else if (key == "mock_fixture") mock_fixture = value;
  else if (key == "cache_dir") cache_dir = value;
  else if (key == "max_in_flight") max_in_flight = parse_integer<std::size_t>(key, value);
  else if (key == "probe_failure_tolerance") probe_failure_tolerance = parse_double(key, value);
  else if (key == "audit_audio") audit_audio = parse_bool(key, value);
  else if (key.starts_with(kPolarityPrefix)) {
    polarity.table[parse_emotion(key.substr(kPolarityPrefix.size()))] = parse_polarity(value);
  } else if (key.starts_with(kModelPrefix)) {
    model_ids[parse_role(key.substr(kModelPrefix.size()))] = value;
  } else if (key.starts_with(kBackendPrefix) && key.ends_with(kUrlSuffix)) {
    const auto role = key.substr(kBackendPrefix.size(),
                                 key.size() - kBackendPrefix.size() - kUrlSuffix.size());
    const BackendRole r = parse_role(role);
    if (value.empty()) role_urls.erase(r);
    else role_urls[r] = value;
  } else {
    throw Error(Errc::parse, "unknown config key '" + key + "'");
  }
}

std::map<std::string, std::string> SelectionConfig::to_key_values() const {
  std::map<std::string, std::string> kv;
  kv["num_clusters"] = std::to_string(num_clusters);
  kv["m"] = std::to_string(m);
  kv["n_percent"] = format_double(n_percent);
  kv["k"] = std::to_string(k);
  kv["seed"] = std::to_string(seed);
  kv["pitch.frame_size_s"] = format_double(pitch.frame_size_s);
  kv["pitch.hop_s"] = format_double(pitch.hop_s);
  kv["pitch.f0_min"] = format_double(pitch.f0_min_hz);
  kv["pitch.f0_max"] = format_double(pitch.f0_max_hz);
  kv["pitch.yin_threshold"] = format_double(pitch.yin_threshold);
  kv["pitch.min_voiced"] = std::to_string(pitch.min_voiced);
  kv["validate.min_duration_s"] = format_double(validation.min_duration_s);
  kv["validate.max_duration_s"] = format_double(validation.max_duration_s);
  kv["validate.max_clip_fraction"] = format_double(validation.max_clip_fraction);
  kv["probes"] = probes_path;
  kv["rubric"] = rubric_path;
  kv["backend_url"] = backend_url;
  kv["timeout_s"] = format_double(timeout_s);
  kv["retries"] = std::to_string(retries);
  kv["backoff_s"] = format_double(backoff_s);
  kv["mock_fixture"] = mock_fixture;
  kv["cache_dir"] = cache_dir;
  kv["max_in_flight"] = std::to_string(max_in_flight);
  kv["probe_failure_tolerance"] = format_double(probe_failure_tolerance);
  kv["audit_audio"] = audit_audio ? "true" : "false";
  for (EmotionLabel e : kAllEmotions) {
    kv[kPolarityPrefix + std::string(to_string(e))] = std::string(to_string(polarity.of(e)));
  }
  for (BackendRole r : kAllRoles) {
    const auto url = role_urls.find(r);
    kv[kBackendPrefix + std::string(to_string(r)) + kUrlSuffix] =
        url == role_urls.end() ? "" : url->second;
    const auto model = model_ids.find(r);
    kv[kModelPrefix + std::string(to_string(r))] =
        model == model_ids.end() ? "" : model->second;
  }
  return kv;
}

SelectionConfig SelectionConfig::from_key_values(
    const std::map<std::string, std::string>& kv) {
  SelectionConfig config;
  for (const auto& [key, value] : kv) config.set(key, value);
  return config;
}

void SelectionConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::invalid_argument, what); };
  if (num_clusters < 1) fail("num_clusters must be at least 1");
  if (m < 1 || m > num_clusters) fail("m must lie in [1, num_clusters]");
  if (!(n_percent > 0.0 && n_percent <= 100.0)) fail("n_percent must lie in (0, 100]");
  if (k < 1) fail("k must be at least 1");
  if (retries < 0) fail("retries must be non-negative");
  if (!(timeout_s > 0.0)) fail("timeout_s must be positive");
  if (max_in_flight < 1) fail("max_in_flight must be at least 1");
  if (!(probe_failure_tolerance >= 0.0 && probe_failure_tolerance <= 1.0)) {
    fail("probe_failure_tolerance must lie in [0, 1]");
  }
  if (!(validation.min_duration_s < validation.max_duration_s)) {
    fail("validate.min_duration_s must be below validate.max_duration_s");
  }
}

std::string SelectionConfig::snapshot_hash() const {
  std::string material;
  for (const auto& [key, value] : to_key_values()) {
    material += key;
    material.push_back('=');
    material += value;
    material.push_back('\n');
  }
  return sha256_hex(material);
}

BackendSet SelectionConfig::backend_set() const {
  BackendSet set;
  for (BackendRole role : kAllRoles) {
    std::string url;
    if (auto it = role_urls.find(role); it != role_urls.end()) url = it->second;
    if (url.empty()) url = backend_url;
    if (url.empty() && mock_fixture.empty()) continue;

    Endpoint ep;
    ep.base_url = url;
    ep.timeout_s = timeout_s;
    ep.retries = retries;
    ep.backoff_s = backoff_s;
    ep.bearer_token = bearer_token;
    if (auto it = model_ids.find(role); it != model_ids.end()) ep.model_id = it->second;
    set.endpoints.emplace(role, ep);
  }
  return set;
}

void apply_config_file(SelectionConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open config " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::parse, path.string() + ":" + std::to_string(line_no) +
                                   ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    // Relative paths in a config file are relative to that file.
    if (kPathKeys.contains(key) && !value.empty() &&
        std::filesystem::path(value).is_relative()) {
      value = (path.parent_path() / value).lexically_normal().string();
    }
    try {
      config.set(key, value);
    } catch (const Error& e) {
      throw Error(Errc::parse, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_environment(SelectionConfig& config) {
  if (const char* v = std::getenv("EMOPRO_BACKEND_URL"); v && *v) config.backend_url = v;
  if (const char* v = std::getenv("EMOPRO_CACHE_DIR"); v && *v) config.cache_dir = v;
  if (const char* v = std::getenv("EMOPRO_SEED"); v && *v) config.set("seed", v);
  if (const char* v = std::getenv("EMOPRO_BACKEND_TOKEN"); v && *v) config.bearer_token = v;
}

}  // namespace emopro
