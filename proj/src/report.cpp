// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include <fmt/format.h>

#include "emopro/error.hpp"
#include "emopro/pipeline.hpp"

namespace emopro {

std::string render_report(const StaticSelectionResult& result) {
  if (!result.complete) {
    throw Error(Errc::incomplete_result,
                "result is incomplete (failed at " + result.failure_stage + ")");
  }
  std::string out = fmt::format("speaker {} / {} ({} of {} candidates)\n", result.speaker,
                                to_string(result.emotion), result.top_k.size(),
                                result.pool_ids.size());
  if (result.top_k.empty()) return out + "no candidates\n";

  out += "PromptID | CER | Resemb | WavLM | ES | Rank\n";
  std::size_t rank = 0;
  for (const auto& id : result.top_k) {
    ++rank;
    const CandidatePerf* perf = nullptr;
    for (const auto& p : result.perf) {
      if (p.candidate_id == id) perf = &p;
    }
    if (perf == nullptr) throw Error(Errc::parse, "no performance record for " + id);
    // fmt never consults the global locale for these specs.
    out += fmt::format("{} | {:.2f}% | {:.4f} | {:.4f} | {:.4f} | Top{}\n", id,
                       perf->mean_cer * 100.0, perf->mean_spk_a, perf->mean_spk_b,
                       perf->mean_emo, rank);
  }
  return out;
}

}  // namespace emopro
