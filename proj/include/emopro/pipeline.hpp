// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "emopro/backend_client.hpp"
#include "emopro/clustering.hpp"
#include "emopro/config.hpp"
#include "emopro/dynamic_selector.hpp"
#include "emopro/model_perf.hpp"
#include "emopro/quality_gate.hpp"

namespace emopro {

inline constexpr int kResultSchemaVersion = 1;

/// Everything a static run decided, persisted as JSON. Stage id lists are
/// nested: top_k within post_quality within post_pitch within pool_ids.
struct StaticSelectionResult {
  bool complete = false;
  std::string failure_stage;
  std::string failure_message;

  std::string config_hash;
  std::map<std::string, std::string> config;
  std::string manifest;
  std::string speaker;
  EmotionLabel emotion = EmotionLabel::happy;
  std::string probe_set_hash;
  std::string rubric_sha256;

  std::vector<std::string> pool_ids;
  std::vector<std::string> post_pitch;
  std::vector<std::string> post_quality;
  std::vector<std::string> top_k;  // best first

  std::map<std::string, std::string> excluded;  // id -> reason
  std::map<std::string, std::string> transcripts;
  std::map<std::string, PitchStats> pitch;
  std::optional<ClusterModel> cluster_model;
  std::vector<std::size_t> cluster_order;
  std::vector<std::size_t> kept_clusters;
  std::vector<QualityScore> quality;  // ranked
  std::vector<CandidatePerf> perf;    // ranked

  std::string started_at;
  std::string finished_at;

  Json to_json() const;
  /// Errors: Errc::schema_version for any other version, Errc::parse for
  /// structural problems.
  static StaticSelectionResult from_json(const Json& doc);
};

/// Transport and cache as configured: in-process mock when mock_fixture
/// is set, HTTP otherwise; on-disk cache when cache_dir is set.
std::unique_ptr<BackendClient> make_backend_client(const SelectionConfig& config);

/// ingest -> pitch -> clustering -> quality gate -> model performance ->
/// top-k. A stage failure is recorded in the returned result (complete =
/// false) rather than thrown, so partial results can be persisted.
StaticSelectionResult run_static(const SelectionConfig& config,
                                 const std::filesystem::path& manifest,
                                 const std::string& speaker, EmotionLabel emotion,
                                 BackendClient& backends);

/// Writes atomically under an advisory lock on `<path>.lock`.
void write_result(const StaticSelectionResult& result, const std::filesystem::path& path);

/// Errors: Errc::io (missing/unreadable), Errc::parse, Errc::schema_version.
StaticSelectionResult read_result(const std::filesystem::path& path);

/// The stored top-k with transcripts, best first.
/// Errors: Errc::incomplete_result for a failed or partial run.
std::vector<StaticChoice> static_choices(const StaticSelectionResult& result);

/// Dynamic selection over a completed static result.
DynamicSelection run_dynamic(const StaticSelectionResult& result,
                             const std::string& target_text, BackendClient& backends);

/// Table of the top-k rows: id, CER (percent, 2 decimals), the two speaker
/// similarities and emotion similarity (4 decimals), rank. Always uses '.'
/// as decimal separator. Errors: Errc::incomplete_result.
std::string render_report(const StaticSelectionResult& result);

}  // namespace emopro
