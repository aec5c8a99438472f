// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "emopro/backend_client.hpp"
#include "emopro/types.hpp"

namespace emopro {

struct QualityScore {
  std::string candidate_id;
  double dnsmos_raw = 0.0;     // [1, 5]
  double coherence_raw = 0.0;  // [0, 1]
  double dnsmos_norm = 0.0;    // min-max within the scored pool
  double coherence_norm = 0.0;
  double combined = 0.0;       // dnsmos_norm + coherence_norm
};

/// `{"candidate", "speaker", "emotion"}` audit object carried in requests.
Json candidate_ref(const PromptCandidate& candidate);

/// Raw perceptual-quality and text-emotion coherence scores for one
/// candidate. Returns std::nullopt (logged) when a backend stays
/// unreachable after retries; protocol errors (schema, range) propagate.
std::optional<QualityScore> score_quality(const PromptCandidate& candidate,
                                          BackendClient& backends,
                                          const std::string& rubric);

struct QualityCut {
  std::vector<QualityScore> ranked;  // normalized, best first
  std::size_t retained = 0;          // leading entries of `ranked` kept

  std::vector<std::string> retained_ids() const;
};

/// ceil(n_percent * count / 100), guarded against floating-point overshoot.
std::size_t top_percent_count(double n_percent, std::size_t count);

/// Min-max normalizes each raw column (a constant column maps to 0.5),
/// sums, orders by combined score descending with lower id first on ties,
/// and keeps the top ceil(n% of the pool).
/// Errors: Errc::empty_pool, Errc::invalid_argument (n_percent not in (0, 100]).
QualityCut aggregate_and_cut(std::vector<QualityScore> scores, double n_percent);

/// The retained candidates of `pool`, in pool order.
CandidatePool retain(const CandidatePool& pool, const std::vector<std::string>& ids);

}  // namespace emopro
