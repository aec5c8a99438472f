// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include "emopro/model_perf.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <sstream>

#include "emopro/builtin_assets.hpp"
#include "emopro/error.hpp"
#include "emopro/hashing.hpp"
#include "emopro/parallel.hpp"
#include "emopro/quality_gate.hpp"
#include "emopro/text_metrics.hpp"
#include "emopro/wav.hpp"

namespace emopro {

namespace {

std::vector<std::string> parse_probe_lines(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    out.push_back(line.substr(first, last - first + 1));
  }
  return out;
}

constexpr std::array<BackendRole, 3> kEmbeddingRoles = {
    BackendRole::speaker_embed_a, BackendRole::speaker_embed_b, BackendRole::emotion_embed};

std::vector<double> embed(BackendClient& backends, BackendRole role,
                          const std::string& audio_b64, const Json& ref) {
  return backends.call(role, {{"audio", audio_b64}, {"ref", ref}})["embedding"]
      .get<std::vector<double>>();
}

}  // namespace

ProbeTextSet::ProbeTextSet(std::vector<std::string> texts) : texts_(std::move(texts)) {
  if (texts_.empty()) throw Error(Errc::invalid_argument, "probe text set is empty");
  std::string material;
  for (const auto& t : texts_) {
    if (t.empty()) throw Error(Errc::invalid_argument, "probe text set has an empty text");
    material += t;
    material.push_back('\n');
  }
  hash_ = sha256_hex(material);
}

ProbeTextSet ProbeTextSet::builtin() {
  return ProbeTextSet(parse_probe_lines(assets::kProbeTextsV1));
}

ProbeTextSet ProbeTextSet::from_file(const std::filesystem::path& path) {
  return ProbeTextSet(parse_probe_lines(wav::read_file(path)));
}

std::vector<ProbeResult> run_probes(const PromptCandidate& candidate,
                                    const ProbeTextSet& probes, BackendClient& backends,
                                    const ProbeOptions& options) {
  const std::string prompt_b64 = base64_encode(wav::read_file(candidate.audio_path));
  const Json prompt_ref = candidate_ref(candidate);

  std::vector<ProbeResult> results(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    results[i].candidate_id = candidate.id;
    results[i].probe_index = i;
    results[i].probe_text = probes.texts()[i];
  }

  std::array<std::vector<double>, kEmbeddingRoles.size()> prompt_embeddings;
  try {
    for (std::size_t r = 0; r < kEmbeddingRoles.size(); ++r) {
      prompt_embeddings[r] = embed(backends, kEmbeddingRoles[r], prompt_b64, prompt_ref);
    }
  } catch (const Error& e) {
    if (e.code() != Errc::transport) throw;
    spdlog::warn("candidate {}: prompt embedding failed: {}", candidate.id, e.what());
    for (auto& r : results) r.error = e.what();
    return results;
  }

  parallel_for(probes.size(), options.workers, [&](std::size_t i) {
    ProbeResult& result = results[i];
    Json ref = prompt_ref;
    ref["probe"] = i;
    ref["probe_set"] = probes.hash();
    try {
      const Json synth = backends.call(BackendRole::tts, {{"prompt_audio", prompt_b64},
                                                          {"prompt_text", candidate.transcript},
                                                          {"text", result.probe_text},
                                                          {"ref", ref}});
      const auto& audio_b64 = synth["audio"].get_ref<const std::string&>();
      const std::string audio_bytes = base64_decode(audio_b64);
      result.synth_audio_sha256 = sha256_hex(audio_bytes);
      if (!options.audit_dir.empty()) {
        const auto dir = options.audit_dir / candidate.id;
        std::filesystem::create_directories(dir);
        wav::write_file(dir / (std::to_string(i) + ".wav"), audio_bytes);
      }

      const Json asr = backends.call(BackendRole::asr, {{"audio", audio_b64}, {"ref", ref}});
      result.asr_hypothesis = asr["text"].get<std::string>();
      result.cer = compute_cer(result.probe_text, result.asr_hypothesis);

      std::array<double, kEmbeddingRoles.size()> sims{};
      for (std::size_t r = 0; r < kEmbeddingRoles.size(); ++r) {
        sims[r] = cosine_similarity(embed(backends, kEmbeddingRoles[r], audio_b64, ref),
                                    prompt_embeddings[r]);
      }
      result.spk_sim_a = sims[0];
      result.spk_sim_b = sims[1];
      result.emo_sim = sims[2];
      result.ok = true;
    } catch (const Error& e) {
      if (e.code() != Errc::transport) throw;
      result.error = e.what();
      spdlog::debug("candidate {} probe {} failed: {}", candidate.id, i, e.what());
    }
  });
  return results;
}

CandidatePerf aggregate_perf(const std::vector<ProbeResult>& results) {
  CandidatePerf perf;
  perf.probes_total = results.size();
  for (const auto& r : results) {
    if (!r.ok) continue;
    if (perf.candidate_id.empty()) perf.candidate_id = r.candidate_id;
    perf.mean_cer += r.cer;
    perf.mean_spk_a += r.spk_sim_a;
    perf.mean_spk_b += r.spk_sim_b;
    perf.mean_emo += r.emo_sim;
    ++perf.probes_ok;
  }
  if (perf.probes_ok == 0) {
    throw Error(Errc::invalid_argument, "no successful probes to aggregate");
  }
  const double n = static_cast<double>(perf.probes_ok);
  perf.mean_cer /= n;
  perf.mean_spk_a /= n;
  perf.mean_spk_b /= n;
  perf.mean_emo /= n;
  return perf;
}

std::optional<CandidatePerf> evaluate_candidate(const PromptCandidate& candidate,
                                                const ProbeTextSet& probes,
                                                BackendClient& backends,
                                                const ProbeOptions& options,
                                                double failure_tolerance) {
  const auto results = run_probes(candidate, probes, backends, options);
  const auto failed = static_cast<std::size_t>(
      std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.ok; }));
  if (static_cast<double>(failed) > failure_tolerance * static_cast<double>(results.size()) ||
      failed == results.size()) {
    spdlog::warn("candidate {} excluded: {} of {} probes failed", candidate.id, failed,
                 results.size());
    return std::nullopt;
  }
  auto perf = aggregate_perf(results);
  perf.candidate_id = candidate.id;
  return perf;
}

std::vector<CandidatePerf> rank_perfs(std::vector<CandidatePerf> perfs) {
  using Column = double CandidatePerf::*;
  struct Metric {
    Column column;
    bool lower_is_better;
  };
  constexpr std::array<Metric, 4> kMetrics = {{{&CandidatePerf::mean_cer, true},
                                               {&CandidatePerf::mean_spk_a, false},
                                               {&CandidatePerf::mean_spk_b, false},
                                               {&CandidatePerf::mean_emo, false}}};

  std::vector<int> rank_sum(perfs.size(), 0);
  for (const auto& metric : kMetrics) {
    for (std::size_t i = 0; i < perfs.size(); ++i) {
      const double mine = perfs[i].*(metric.column);
      int better = 0;
      for (const auto& other : perfs) {
        const double theirs = other.*(metric.column);
        if (metric.lower_is_better ? theirs < mine : theirs > mine) ++better;
      }
      rank_sum[i] += better + 1;
    }
  }
  for (std::size_t i = 0; i < perfs.size(); ++i) perfs[i].rank_score = rank_sum[i];

  std::sort(perfs.begin(), perfs.end(), [](const CandidatePerf& a, const CandidatePerf& b) {
    if (a.rank_score != b.rank_score) return a.rank_score < b.rank_score;
    if (a.mean_cer != b.mean_cer) return a.mean_cer < b.mean_cer;
    return a.candidate_id < b.candidate_id;
  });
  return perfs;
}

std::vector<CandidatePerf> rank_and_select_topk(std::vector<CandidatePerf> perfs,
                                                std::size_t k) {
  auto ranked = rank_perfs(std::move(perfs));
  ranked.resize(std::min(k, ranked.size()));
  return ranked;
}

}  // namespace emopro
