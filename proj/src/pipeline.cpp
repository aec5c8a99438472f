// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include "emopro/pipeline.hpp"

#include <fcntl.h>
#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <set>

#include "emopro/builtin_assets.hpp"
#include "emopro/corpus.hpp"
#include "emopro/error.hpp"
#include "emopro/hashing.hpp"
#include "emopro/mock_backend.hpp"
#include "emopro/parallel.hpp"
#include "emopro/wav.hpp"

namespace emopro {

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json pitch_to_json(const PitchStats& s) {
  return {{"mean_hz", s.mean_hz},
          {"variance_hz2", s.variance_hz2},
          {"voiced_frames", s.voiced_frames},
          {"total_frames", s.total_frames}};
}

PitchStats pitch_from_json(const Json& j) {
  PitchStats s;
  s.mean_hz = j.at("mean_hz").get<double>();
  s.variance_hz2 = j.at("variance_hz2").get<double>();
  s.voiced_frames = j.at("voiced_frames").get<std::size_t>();
  s.total_frames = j.at("total_frames").get<std::size_t>();
  return s;
}

Json model_to_json(const ClusterModel& m) {
  Json centroids = Json::array();
  for (const auto& c : m.centroids) centroids.push_back({c.x, c.y});
  return {{"k", m.k},
          {"seed", m.seed},
          {"inertia", m.inertia},
          {"best_restart", m.best_restart},
          {"centroids", centroids},
          {"assignments", m.assignments},
          {"candidate_ids", m.candidate_ids},
          {"norm",
           {{"mean_center", m.norm.mean_center},
            {"mean_scale", m.norm.mean_scale},
            {"var_center", m.norm.var_center},
            {"var_scale", m.norm.var_scale}}},
          {"inertia_trace", m.inertia_trace}};
}

ClusterModel model_from_json(const Json& j) {
  ClusterModel m;
  m.k = j.at("k").get<std::size_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.inertia = j.at("inertia").get<double>();
  m.best_restart = j.at("best_restart").get<std::size_t>();
  for (const auto& c : j.at("centroids")) m.centroids.push_back({c.at(0), c.at(1)});
  m.assignments = j.at("assignments").get<std::vector<std::size_t>>();
  m.candidate_ids = j.at("candidate_ids").get<std::vector<std::string>>();
  const Json& n = j.at("norm");
  m.norm = {n.at("mean_center"), n.at("mean_scale"), n.at("var_center"), n.at("var_scale")};
  m.inertia_trace = j.at("inertia_trace").get<std::vector<double>>();
  return m;
}

Json quality_to_json(const QualityScore& q) {
  return {{"id", q.candidate_id},
          {"dnsmos_raw", q.dnsmos_raw},
          {"coherence_raw", q.coherence_raw},
          {"dnsmos_norm", q.dnsmos_norm},
          {"coherence_norm", q.coherence_norm},
          {"combined", q.combined}};
}

QualityScore quality_from_json(const Json& j) {
  return {j.at("id"),          j.at("dnsmos_raw"),     j.at("coherence_raw"),
          j.at("dnsmos_norm"), j.at("coherence_norm"), j.at("combined")};
}

Json perf_to_json(const CandidatePerf& p) {
  return {{"id", p.candidate_id},       {"mean_cer", p.mean_cer},
          {"mean_spk_a", p.mean_spk_a}, {"mean_spk_b", p.mean_spk_b},
          {"mean_emo", p.mean_emo},     {"rank_score", p.rank_score},
          {"probes_ok", p.probes_ok},   {"probes_total", p.probes_total}};
}

CandidatePerf perf_from_json(const Json& j) {
  CandidatePerf p;
  p.candidate_id = j.at("id");
  p.mean_cer = j.at("mean_cer");
  p.mean_spk_a = j.at("mean_spk_a");
  p.mean_spk_b = j.at("mean_spk_b");
  p.mean_emo = j.at("mean_emo");
  p.rank_score = j.at("rank_score");
  p.probes_ok = j.at("probes_ok");
  p.probes_total = j.at("probes_total");
  return p;
}

std::string load_rubric(const SelectionConfig& config) {
  if (config.rubric_path.empty()) return std::string(assets::kCoherenceRubricV1);
  return wav::read_file(config.rubric_path);
}

ProbeTextSet load_probes(const SelectionConfig& config) {
  if (config.probes_path.empty()) return ProbeTextSet::builtin();
  return ProbeTextSet::from_file(config.probes_path);
}

std::string pitch_config_tag(const PitchConfig& p) {
  return fmt::format("yin frame={} hop={} fmin={} fmax={} thr={} min_voiced={}",
                     p.frame_size_s, p.hop_s, p.f0_min_hz, p.f0_max_hz, p.yin_threshold,
                     p.min_voiced);
}

// Pitch stats (or the reason a candidate has none), cached by audio content.
struct PitchOutcome {
  std::optional<PitchStats> stats;
  std::string excluded_reason;
};

PitchOutcome analyse_candidate(const PromptCandidate& candidate, const SelectionConfig& config,
                               RequestCache& cache) {
  const std::string bytes = wav::read_file(candidate.audio_path);
  const std::string key =
      RequestCache::make_key("local/pitch", pitch_config_tag(config.pitch), sha256_hex(bytes));
  if (auto hit = cache.get(key)) {
    const Json j = Json::parse(hit->response);
    if (j.contains("excluded")) return {std::nullopt, j.at("excluded").get<std::string>()};
    return {pitch_from_json(j), {}};
  }

  PitchOutcome outcome;
  try {
    const auto decoded = wav::decode(bytes);
    const auto report = validate_candidate(candidate, decoded.audio, config.validation);
    for (const auto& flag : report.flags()) {
      spdlog::warn("candidate {}: {}", candidate.id, flag);
    }
    config.pitch.validate(decoded.audio.sample_rate_hz());
    outcome.stats =
        compute_pitch_stats(estimate_f0_contour(decoded.audio, config.pitch), config.pitch);
  } catch (const Error& e) {
    if (e.code() != Errc::corrupt_audio && e.code() != Errc::unsupported_audio &&
        e.code() != Errc::insufficient_voicing) {
      throw;
    }
    spdlog::warn("candidate {} excluded: {}", candidate.id, e.what());
    outcome.excluded_reason = std::string(to_string(e.code())) + ": " + e.what();
  }
  cache.put(key, outcome.stats ? pitch_to_json(*outcome.stats).dump()
                               : Json{{"excluded", outcome.excluded_reason}}.dump());
  return outcome;
}

class StageTracker {
 public:
  explicit StageTracker(StaticSelectionResult& result) : result_(result) {}
  void enter(std::string stage) {
    stage_ = std::move(stage);
    spdlog::info("stage: {}", stage_);
  }
  void fail(const std::string& message) {
    result_.complete = false;
    result_.failure_stage = stage_;
    result_.failure_message = message;
    spdlog::error("stage {} failed: {}", stage_, message);
  }

 private:
  StaticSelectionResult& result_;
  std::string stage_;
};

}  // namespace

Json StaticSelectionResult::to_json() const {
  Json doc;
  doc["schema_version"] = kResultSchemaVersion;
  doc["status"] = complete ? "complete" : "failed";
  if (!complete) doc["failure"] = {{"stage", failure_stage}, {"message", failure_message}};
  doc["config_hash"] = config_hash;
  doc["config"] = config;
  doc["manifest"] = manifest;
  doc["speaker"] = speaker;
  doc["emotion"] = to_string(emotion);
  doc["probe_set_hash"] = probe_set_hash;
  doc["rubric_sha256"] = rubric_sha256;
  doc["stages"] = {{"pool", pool_ids},
                   {"post_pitch", post_pitch},
                   {"post_quality", post_quality},
                   {"top_k", top_k}};
  doc["excluded"] = excluded;
  doc["transcripts"] = transcripts;
  Json pitch_json = Json::object();
  for (const auto& [id, s] : pitch) pitch_json[id] = pitch_to_json(s);
  doc["pitch"] = pitch_json;
  doc["cluster_model"] = cluster_model ? model_to_json(*cluster_model) : Json();
  doc["cluster_order"] = cluster_order;
  doc["kept_clusters"] = kept_clusters;
  Json quality_json = Json::array();
  for (const auto& q : quality) quality_json.push_back(quality_to_json(q));
  doc["quality"] = quality_json;
  Json perf_json = Json::array();
  for (const auto& p : perf) perf_json.push_back(perf_to_json(p));
  doc["perf"] = perf_json;
  doc["timestamps"] = {{"started_at", started_at}, {"finished_at", finished_at}};
  return doc;
}

StaticSelectionResult StaticSelectionResult::from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("schema_version")) {
    throw Error(Errc::parse, "result file has no schema_version");
  }
  if (!doc["schema_version"].is_number_integer() ||
      doc["schema_version"].get<int>() != kResultSchemaVersion) {
    throw Error(Errc::schema_version, "unsupported result schema_version " +
                                          doc["schema_version"].dump() + " (expected " +
                                          std::to_string(kResultSchemaVersion) + ")");
  }
  try {
    StaticSelectionResult r;
    r.complete = doc.at("status").get<std::string>() == "complete";
    if (!r.complete && doc.contains("failure")) {
      r.failure_stage = doc["failure"].at("stage");
      r.failure_message = doc["failure"].at("message");
    }
    r.config_hash = doc.at("config_hash");
    r.config = doc.at("config").get<std::map<std::string, std::string>>();
    r.manifest = doc.at("manifest");
    r.speaker = doc.at("speaker");
    r.emotion = parse_emotion(doc.at("emotion").get<std::string>());
    r.probe_set_hash = doc.at("probe_set_hash");
    r.rubric_sha256 = doc.at("rubric_sha256");
    const Json& stages = doc.at("stages");
    r.pool_ids = stages.at("pool").get<std::vector<std::string>>();
    r.post_pitch = stages.at("post_pitch").get<std::vector<std::string>>();
    r.post_quality = stages.at("post_quality").get<std::vector<std::string>>();
    r.top_k = stages.at("top_k").get<std::vector<std::string>>();
    r.excluded = doc.at("excluded").get<std::map<std::string, std::string>>();
    r.transcripts = doc.at("transcripts").get<std::map<std::string, std::string>>();
    for (const auto& [id, s] : doc.at("pitch").items()) r.pitch[id] = pitch_from_json(s);
    if (!doc.at("cluster_model").is_null()) r.cluster_model = model_from_json(doc["cluster_model"]);
    r.cluster_order = doc.at("cluster_order").get<std::vector<std::size_t>>();
    r.kept_clusters = doc.at("kept_clusters").get<std::vector<std::size_t>>();
    for (const auto& q : doc.at("quality")) r.quality.push_back(quality_from_json(q));
    for (const auto& p : doc.at("perf")) r.perf.push_back(perf_from_json(p));
    r.started_at = doc.at("timestamps").at("started_at");
    r.finished_at = doc.at("timestamps").at("finished_at");
    return r;
  } catch (const Json::exception& e) {
    throw Error(Errc::parse, std::string("malformed result file: ") + e.what());
  }
}

std::unique_ptr<BackendClient> make_backend_client(const SelectionConfig& config) {
  std::shared_ptr<Transport> transport;
  if (!config.mock_fixture.empty()) {
    transport = std::make_shared<MockTransport>(MockBackend::from_file(config.mock_fixture));
  } else {
    transport = std::make_shared<HttpTransport>();
  }
  return std::make_unique<BackendClient>(config.backend_set(), std::move(transport),
                                         std::make_shared<RequestCache>(config.cache_dir),
                                         config.max_in_flight);
}

StaticSelectionResult run_static(const SelectionConfig& config,
                                 const std::filesystem::path& manifest,
                                 const std::string& speaker, EmotionLabel emotion,
                                 BackendClient& backends) {
  StaticSelectionResult result;
  result.started_at = utc_now();
  result.config = config.to_key_values();
  result.config_hash = config.snapshot_hash();
  result.manifest = manifest.string();
  result.speaker = speaker;
  result.emotion = emotion;

  StageTracker tracker(result);
  try {
    tracker.enter("config");
    config.validate();
    const ProbeTextSet probes = load_probes(config);
    const std::string rubric = load_rubric(config);
    result.probe_set_hash = probes.hash();
    result.rubric_sha256 = sha256_hex(rubric);

    tracker.enter("ingest");
    const CandidatePool pool = load_manifest(manifest, speaker, emotion);
    result.pool_ids = pool.ids();
    for (const auto& c : pool.candidates) result.transcripts[c.id] = c.transcript;

    tracker.enter("pitch");
    std::vector<PitchOutcome> outcomes(pool.size());
    parallel_for(pool.size(), std::thread::hardware_concurrency(), [&](std::size_t i) {
      outcomes[i] = analyse_candidate(pool.candidates[i], config, backends.cache());
    });
    std::map<std::string, PitchStats> stats;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const auto& id = pool.candidates[i].id;
      if (outcomes[i].stats) {
        stats[id] = *outcomes[i].stats;
      } else {
        result.excluded[id] = outcomes[i].excluded_reason;
      }
    }
    result.pitch = stats;

    tracker.enter("clustering");
    const PitchSelection pitch_sel =
        select_pitch_clusters(pool, stats, config.num_clusters, config.m,
                              config.polarity.of(emotion), config.seed);
    result.cluster_model = pitch_sel.model;
    result.cluster_order = pitch_sel.cluster_order;
    result.kept_clusters = pitch_sel.kept_clusters;
    result.post_pitch = pitch_sel.pool.ids();

    tracker.enter("quality");
    const auto& survivors = pitch_sel.pool.candidates;
    std::vector<std::optional<QualityScore>> scored(survivors.size());
    parallel_for(survivors.size(), config.max_in_flight, [&](std::size_t i) {
      scored[i] = score_quality(survivors[i], backends, rubric);
    });
    std::vector<QualityScore> scores;
    for (std::size_t i = 0; i < survivors.size(); ++i) {
      if (scored[i]) {
        scores.push_back(*scored[i]);
      } else {
        result.excluded[survivors[i].id] = "quality: unscored after transport failure";
      }
    }
    const QualityCut cut = aggregate_and_cut(std::move(scores), config.n_percent);
    result.quality = cut.ranked;
    const CandidatePool gated = retain(pitch_sel.pool, cut.retained_ids());
    result.post_quality = gated.ids();

    tracker.enter("model_perf");
    ProbeOptions options;
    options.workers = config.max_in_flight;
    if (config.audit_audio && !config.cache_dir.empty()) {
      options.audit_dir = std::filesystem::path(config.cache_dir) / "audit";
    }
    std::vector<CandidatePerf> perfs;
    for (const auto& candidate : gated.candidates) {
      if (auto perf = evaluate_candidate(candidate, probes, backends, options,
                                         config.probe_failure_tolerance)) {
        perfs.push_back(*perf);
      } else {
        result.excluded[candidate.id] = "model_perf: too many failed probes";
      }
    }
    if (perfs.empty()) throw Error(Errc::empty_pool, "no candidate survived probe evaluation");

    tracker.enter("top_k");
    result.perf = rank_perfs(perfs);
    for (const auto& p : rank_and_select_topk(perfs, config.k)) {
      result.top_k.push_back(p.candidate_id);
    }
    result.complete = true;
  } catch (const Error& e) {
    tracker.fail(e.what());
  } catch (const std::exception& e) {
    tracker.fail(e.what());
  }
  result.finished_at = utc_now();
  spdlog::info("stage sizes: pool={} post_pitch={} post_quality={} top_k={}",
               result.pool_ids.size(), result.post_pitch.size(), result.post_quality.size(),
               result.top_k.size());
  return result;
}

void write_result(const StaticSelectionResult& result, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::string lock_path = path.string() + ".lock";
  const int fd = ::open(lock_path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(Errc::io, "cannot open lock file " + lock_path);
  if (::flock(fd, LOCK_EX) != 0) {
    ::close(fd);
    throw Error(Errc::io, "cannot lock " + lock_path);
  }
  try {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    wav::write_file(tmp, result.to_json().dump(2) + "\n");
    std::filesystem::rename(tmp, path);
  } catch (...) {
    ::flock(fd, LOCK_UN);
    ::close(fd);
    throw;
  }
  ::flock(fd, LOCK_UN);
  ::close(fd);
}

StaticSelectionResult read_result(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(Errc::io, "result file not found: " + path.string());
  }
  const std::string text = wav::read_file(path);
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(Errc::parse, path.string() + ": " + e.what());
  }
  return StaticSelectionResult::from_json(doc);
}

std::vector<StaticChoice> static_choices(const StaticSelectionResult& result) {
  if (!result.complete) {
    throw Error(Errc::incomplete_result,
                "result is incomplete (failed at " + result.failure_stage + ")");
  }
  std::vector<StaticChoice> choices;
  for (const auto& id : result.top_k) {
    const auto it = result.transcripts.find(id);
    if (it == result.transcripts.end()) {
      throw Error(Errc::parse, "no transcript stored for top-k candidate " + id);
    }
    choices.push_back({id, it->second});
  }
  return choices;
}

DynamicSelection run_dynamic(const StaticSelectionResult& result,
                             const std::string& target_text, BackendClient& backends) {
  return select_prompt(target_text, static_choices(result), backends);
}

}  // namespace emopro
