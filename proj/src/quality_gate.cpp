// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include "emopro/quality_gate.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "emopro/error.hpp"
#include "emopro/hashing.hpp"
#include "emopro/wav.hpp"

namespace emopro {

Json candidate_ref(const PromptCandidate& candidate) {
  return Json{{"candidate", candidate.id},
              {"speaker", candidate.speaker_id},
              {"emotion", to_string(candidate.emotion)}};
}

std::optional<QualityScore> score_quality(const PromptCandidate& candidate,
                                          BackendClient& backends,
                                          const std::string& rubric) {
  const Json ref = candidate_ref(candidate);
  QualityScore score;
  score.candidate_id = candidate.id;
  try {
    const Json quality = backends.call(
        BackendRole::quality,
        {{"audio", base64_encode(wav::read_file(candidate.audio_path))}, {"ref", ref}});
    score.dnsmos_raw = quality["score"].get<double>();

    const Json coherence = backends.call(BackendRole::coherence,
                                         {{"text", candidate.transcript},
                                          {"emotion", to_string(candidate.emotion)},
                                          {"rubric", rubric},
                                          {"ref", ref}});
    score.coherence_raw = coherence["score"].get<double>();
  } catch (const Error& e) {
    if (e.code() != Errc::transport) throw;
    spdlog::warn("candidate {} unscored: {}", candidate.id, e.what());
    return std::nullopt;
  }
  return score;
}

std::vector<std::string> QualityCut::retained_ids() const {
  std::vector<std::string> ids;
  ids.reserve(retained);
  for (std::size_t i = 0; i < retained; ++i) ids.push_back(ranked[i].candidate_id);
  return ids;
}

std::size_t top_percent_count(double n_percent, std::size_t count) {
  const double exact = n_percent * static_cast<double>(count) / 100.0;
  const auto n = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  return std::min(n, count);
}

QualityCut aggregate_and_cut(std::vector<QualityScore> scores, double n_percent) {
  if (scores.empty()) throw Error(Errc::empty_pool, "no scored candidates to cut");
  if (!(n_percent > 0.0 && n_percent <= 100.0)) {
    throw Error(Errc::invalid_argument, "n_percent must lie in (0, 100]");
  }

  auto normalize = [&](auto raw, auto norm) {
    const auto [lo, hi] = std::minmax_element(
        scores.begin(), scores.end(),
        [&](const QualityScore& a, const QualityScore& b) { return a.*raw < b.*raw; });
    const double min = (*lo).*raw;
    const double span = (*hi).*raw - min;
    for (auto& s : scores) s.*norm = span > 0.0 ? (s.*raw - min) / span : 0.5;
  };
  normalize(&QualityScore::dnsmos_raw, &QualityScore::dnsmos_norm);
  normalize(&QualityScore::coherence_raw, &QualityScore::coherence_norm);
  for (auto& s : scores) s.combined = s.dnsmos_norm + s.coherence_norm;

  std::sort(scores.begin(), scores.end(), [](const QualityScore& a, const QualityScore& b) {
    if (a.combined != b.combined) return a.combined > b.combined;
    return a.candidate_id < b.candidate_id;
  });

  QualityCut cut;
  cut.retained = top_percent_count(n_percent, scores.size());
  cut.ranked = std::move(scores);
  return cut;
}

CandidatePool retain(const CandidatePool& pool, const std::vector<std::string>& ids) {
  const std::set<std::string> keep(ids.begin(), ids.end());
  CandidatePool out;
  out.speaker_id = pool.speaker_id;
  out.emotion = pool.emotion;
  for (const auto& c : pool.candidates) {
    if (keep.contains(c.id)) out.candidates.push_back(c);
  }
  return out;
}

}  // namespace emopro
