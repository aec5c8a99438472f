// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "emopro/backend_protocol.hpp"
#include "emopro/clustering.hpp"
#include "emopro/corpus.hpp"
#include "emopro/pitch.hpp"

namespace emopro {

/// Every pipeline knob. Keys (see keys()) are shared by the config file,
/// the CLI flags and the snapshot stored in result files.
struct SelectionConfig {
  std::size_t num_clusters = 10;
  std::size_t m = 3;
  double n_percent = 15.0;
  std::size_t k = 5;
  std::uint64_t seed = 0;
  EmotionPolarity polarity;
  PitchConfig pitch;
  ValidationLimits validation;

  std::string probes_path;  // empty: built-in probe texts
  std::string rubric_path;  // empty: built-in rubric

  std::string backend_url;
  std::map<BackendRole, std::string> role_urls;
  std::map<BackendRole, std::string> model_ids = default_model_ids();
  double timeout_s = 30.0;
  int retries = 3;
  double backoff_s = 0.2;
  std::string mock_fixture;  // non-empty: serve every role in-process
  std::string cache_dir;
  std::size_t max_in_flight = 8;
  double probe_failure_tolerance = 0.25;
  bool audit_audio = false;

  /// Not a config key: read from EMOPRO_BACKEND_TOKEN only and never
  /// written to result files.
  std::string bearer_token;

  static std::map<BackendRole, std::string> default_model_ids();
  static const std::vector<std::string>& keys();

  /// Throws Error(Errc::parse) for an unknown key or malformed value.
  void set(const std::string& key, const std::string& value);
  /// Canonical textual form of every key, sorted by key.
  std::map<std::string, std::string> to_key_values() const;
  static SelectionConfig from_key_values(const std::map<std::string, std::string>& kv);

  /// Throws Error(Errc::invalid_argument) when invariants fail.
  void validate() const;

  /// SHA-256 over to_key_values(); changes iff some key's value changes.
  std::string snapshot_hash() const;

  /// Endpoints for every role with a URL (or all roles in mock mode).
  BackendSet backend_set() const;
};

/// `key = value` lines; '#' starts a comment; blank lines ignored.
/// Errors carry the 1-based line number.
void apply_config_file(SelectionConfig& config, const std::filesystem::path& path);

/// EMOPRO_BACKEND_URL, EMOPRO_CACHE_DIR, EMOPRO_SEED, EMOPRO_BACKEND_TOKEN.
void apply_environment(SelectionConfig& config);

}  // namespace emopro
