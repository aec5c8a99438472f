// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "emopro/backend_client.hpp"
#include "emopro/types.hpp"

namespace emopro {

/// Neutral descriptive texts synthesized with each candidate prompt.
class ProbeTextSet {
 public:
  explicit ProbeTextSet(std::vector<std::string> texts);

  /// The 20 texts shipped in assets/probe_texts_v1.txt.
  static ProbeTextSet builtin();
  /// One text per non-blank line; '#' lines are comments.
  static ProbeTextSet from_file(const std::filesystem::path& path);

  const std::vector<std::string>& texts() const { return texts_; }
  std::size_t size() const { return texts_.size(); }
  /// SHA-256 over the texts; part of every probe cache key.
  const std::string& hash() const { return hash_; }

 private:
  std::vector<std::string> texts_;
  std::string hash_;
};

struct ProbeResult {
  std::string candidate_id;
  std::size_t probe_index = 0;
  std::string probe_text;
  bool ok = false;
  std::string error;              // set when !ok
  std::string synth_audio_sha256;
  std::string asr_hypothesis;
  double cer = 0.0;
  double spk_sim_a = 0.0;
  double spk_sim_b = 0.0;
  double emo_sim = 0.0;
};

struct ProbeOptions {
  std::size_t workers = 8;
  /// When set, synthesized probe audio is written to
  /// <audit_dir>/<candidate>/<probe>.wav.
  std::filesystem::path audit_dir;
};

/// Synthesizes every probe text with the candidate as prompt, transcribes
/// the result and compares speaker/emotion embeddings against the prompt.
/// Transport failures mark the affected probe (or, for the prompt-side
/// embeddings, every probe) as failed; protocol errors propagate.
std::vector<ProbeResult> run_probes(const PromptCandidate& candidate,
                                    const ProbeTextSet& probes, BackendClient& backends,
                                    const ProbeOptions& options = {});

struct CandidatePerf {
  std::string candidate_id;
  double mean_cer = 0.0;
  double mean_spk_a = 0.0;
  double mean_spk_b = 0.0;
  double mean_emo = 0.0;
  int rank_score = 0;  // Borda rank-sum, lower is better
  std::size_t probes_ok = 0;
  std::size_t probes_total = 0;
};

/// Arithmetic means over the successful probes.
/// Errors: Errc::invalid_argument when no probe succeeded.
CandidatePerf aggregate_perf(const std::vector<ProbeResult>& results);

/// Share of failed probes above which a candidate is dropped.
inline constexpr double kDefaultProbeFailureTolerance = 0.25;

/// run_probes + aggregate_perf; std::nullopt (logged) when more than
/// `failure_tolerance` of the probes failed.
std::optional<CandidatePerf> evaluate_candidate(
    const PromptCandidate& candidate, const ProbeTextSet& probes, BackendClient& backends,
    const ProbeOptions& options = {},
    double failure_tolerance = kDefaultProbeFailureTolerance);

/// Borda rank-sum over mean_cer (ascending) and mean_spk_a, mean_spk_b,
/// mean_emo (descending). Within a column tied values share the lower
/// rank. Ordered by rank_score, then mean_cer, then id; all rows returned
/// with rank_score filled in.
std::vector<CandidatePerf> rank_perfs(std::vector<CandidatePerf> perfs);

/// The first min(k, |perfs|) rows of rank_perfs.
std::vector<CandidatePerf> rank_and_select_topk(std::vector<CandidatePerf> perfs,
                                                std::size_t k);

}  // namespace emopro
