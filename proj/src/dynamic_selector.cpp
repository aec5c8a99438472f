// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include "emopro/dynamic_selector.hpp"

#include <spdlog/spdlog.h>

#include "emopro/error.hpp"

namespace emopro {

std::size_t argmax_first(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

DynamicSelection select_prompt(const std::string& target_text,
                               const std::vector<StaticChoice>& candidates,
                               BackendClient& backends) {
  if (candidates.empty()) throw Error(Errc::invalid_argument, "no candidates to select from");
  if (target_text.empty()) throw Error(Errc::invalid_argument, "target text is empty");

  Json texts = Json::array();
  for (const auto& c : candidates) texts.push_back(c.transcript);

  DynamicSelection selection;
  std::vector<double> relevance;
  try {
    const Json result = backends.call(
        BackendRole::semantic, {{"target_text", target_text}, {"candidate_texts", texts}});
    relevance = result["scores"].get<std::vector<double>>();
  } catch (const Error& e) {
    spdlog::warn("semantic backend failed, using static Top-1: {}", e.what());
    selection.chosen = candidates.front().candidate_id;
    selection.fell_back = true;
    selection.fallback_reason = e.what();
    return selection;
  }

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    selection.scores.push_back({candidates[i].candidate_id, relevance[i]});
  }
  selection.chosen = candidates[argmax_first(relevance)].candidate_id;
  return selection;
}

}  // namespace emopro
