// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "emopro/backend_client.hpp"

namespace emopro {

struct StaticChoice {
  std::string candidate_id;
  std::string transcript;
};

struct SemanticScore {
  std::string candidate_id;
  double relevance = 0.0;  // [0, 1]
};

struct DynamicSelection {
  std::string chosen;
  std::vector<SemanticScore> scores;  // static order; empty on fallback
  bool fell_back = false;
  std::string fallback_reason;
};

/// Highest-relevance candidate for `target_text` from the static top-k
/// (given best first); ties go to the earlier candidate. Relevance is
/// scored text-to-text against each prompt transcript in one semantic
/// request. If the backend fails, the static Top-1 is returned with
/// `fell_back` set. Errors: Errc::invalid_argument for an empty candidate
/// list or empty target text.
DynamicSelection select_prompt(const std::string& target_text,
                               const std::vector<StaticChoice>& candidates,
                               BackendClient& backends);

/// Argmax with the earliest-index tie rule.
std::size_t argmax_first(const std::vector<double>& values);

}  // namespace emopro
