// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <clocale>
#include <fstream>
#include <set>

#include "emopro/error.hpp"
#include "emopro/pipeline.hpp"
#include "emopro/wav.hpp"
#include "fixtures.hpp"

using namespace emopro;

namespace {

bool subset(const std::vector<std::string>& inner, const std::vector<std::string>& outer) {
  const std::set<std::string> o(outer.begin(), outer.end());
  return std::all_of(inner.begin(), inner.end(), [&](const auto& id) { return o.contains(id); });
}

StaticSelectionResult run(const SelectionConfig& config, const testing::BlobCorpus& corpus) {
  auto client = make_backend_client(config);
  return run_static(config, corpus.manifest, "spk1", EmotionLabel::happy, *client);
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::io;
}

StaticSelectionResult reference_rows() {
  StaticSelectionResult r;
  r.complete = true;
  r.speaker = "spk";
  r.emotion = EmotionLabel::happy;
  r.pool_ids = {"083", "112", "119", "165"};
  r.post_pitch = r.pool_ids;
  r.post_quality = {"112", "119", "165"};
  r.top_k = {"165", "112", "119"};
  auto perf = [](std::string id, double cer, double a, double b, double e) {
    CandidatePerf p;
    p.candidate_id = std::move(id);
    p.mean_cer = cer;
    p.mean_spk_a = a;
    p.mean_spk_b = b;
    p.mean_emo = e;
    return p;
  };
  r.perf = {perf("165", 0.0155, 0.9366, 0.8210, 0.9837),
            perf("112", 0.0201, 0.9067, 0.8174, 0.9845),
            perf("119", 0.0186, 0.9168, 0.7917, 0.9761)};
  for (const auto& id : r.pool_ids) r.transcripts[id] = "transcript " + id;
  return r;
}

}  // namespace

TEST_CASE("blob corpus: stage sizes, containment and pitch polarity") {
  testing::TempDir dir;
  const auto corpus = testing::make_blob_corpus(dir.path());
  const auto result = run(testing::mock_config(corpus.fixture), corpus);
  REQUIRE_MESSAGE(result.complete, result.failure_message);
  CHECK(result.pool_ids.size() == 200);
  CHECK(result.post_pitch.size() == 60);
  CHECK(result.post_quality.size() == 9);
  CHECK(result.top_k.size() == 5);
  CHECK(subset(result.post_pitch, result.pool_ids));
  CHECK(subset(result.post_quality, result.post_pitch));
  CHECK(subset(result.top_k, result.post_quality));
  CHECK(result.excluded.empty());

  std::set<std::size_t> blobs;
  for (const auto& id : result.post_pitch) blobs.insert(corpus.blob_of.at(id));
  CHECK(blobs == std::set<std::size_t>{3, 6, 9});
  CHECK(result.kept_clusters.size() == 3);
  REQUIRE(result.cluster_model.has_value());
  CHECK(result.cluster_model->k == 10);

  CHECK(result.probe_set_hash == ProbeTextSet::builtin().hash());
  CHECK(result.rubric_sha256.size() == 64);
  CHECK(result.config_hash == testing::mock_config(corpus.fixture).snapshot_hash());
  CHECK(result.perf.size() == 9);
  CHECK(result.quality.size() == 60);
}

TEST_CASE("low-polarity emotion keeps the flattest blobs") {
  testing::TempDir dir;
  const auto corpus = testing::make_blob_corpus(dir.path());
  auto config = testing::mock_config(corpus.fixture);
  config.set("polarity.happy", "low");
  const auto result = run(config, corpus);
  REQUIRE(result.complete);
  std::set<std::size_t> blobs;
  for (const auto& id : result.post_pitch) blobs.insert(corpus.blob_of.at(id));
  CHECK(blobs == std::set<std::size_t>{0, 1, 2});
}

TEST_CASE("deterministic result files; warm cache makes no wire calls") {
  testing::TempDir dir;
  const auto corpus = testing::make_blob_corpus(dir.path());
  const auto config = testing::mock_config(corpus.fixture, dir / "cache");

  auto cold = make_backend_client(config);
  const auto first = run_static(config, corpus.manifest, "spk1", EmotionLabel::happy, *cold);
  CHECK(cold->wire_calls() > 0);
  write_result(first, dir / "out/a.json");

  auto warm = make_backend_client(config);
  const auto second = run_static(config, corpus.manifest, "spk1", EmotionLabel::happy, *warm);
  CHECK(warm->wire_calls() == 0);
  write_result(second, dir / "out/b.json");

  const auto a = wav::read_file(dir / "out/a.json");
  const auto b = wav::read_file(dir / "out/b.json");
  CHECK(testing::strip_timestamps(a) == testing::strip_timestamps(b));
  CHECK_FALSE(std::filesystem::exists(dir / "out/a.json.tmp"));
}

TEST_CASE("keeping every cluster and every candidate passes the whole pool on") {
  testing::TempDir dir;
  const auto corpus = testing::make_blob_corpus(dir.path());
  auto config = testing::mock_config(corpus.fixture);
  config.m = 10;
  config.n_percent = 100;
  config.k = 3;
  std::ofstream(dir / "probes.txt") << "First probe.\nSecond probe.\n";
  config.probes_path = (dir / "probes.txt").string();
  const auto result = run(config, corpus);
  REQUIRE(result.complete);
  CHECK(result.post_pitch == result.pool_ids);
  CHECK(result.post_quality == result.pool_ids);
  CHECK(result.top_k.size() == 3);
}

TEST_CASE("stage failures are recorded and persisted") {
  testing::TempDir dir;
  const auto corpus = testing::make_blob_corpus(dir.path());
  auto config = testing::mock_config(corpus.fixture);
  config.m = 11;
  auto r = run(config, corpus);
  CHECK_FALSE(r.complete);
  CHECK(r.failure_stage == "config");

  auto fixture = testing::blob_mock_fixture();
  fixture["fail"] = {{"tts", {"*"}}};
  std::ofstream(dir / "failing.json") << fixture.dump();
  auto failing = testing::mock_config(dir / "failing.json");
  failing.retries = 0;
  r = run(failing, corpus);
  CHECK_FALSE(r.complete);
  CHECK(r.failure_stage == "model_perf");
  CHECK(r.post_quality.size() == 9);
  CHECK(r.top_k.empty());
  CHECK(r.excluded.size() == 9);

  write_result(r, dir / "partial.json");
  const auto back = read_result(dir / "partial.json");
  CHECK_FALSE(back.complete);
  CHECK(back.failure_stage == "model_perf");
  CHECK(back.post_quality == r.post_quality);
  CHECK(code_of([&] { static_choices(back); }) == Errc::incomplete_result);
  CHECK(code_of([&] { render_report(back); }) == Errc::incomplete_result);

  r = run(testing::mock_config(corpus.fixture), [&] {
    auto c = corpus;
    c.manifest = dir / "absent.jsonl";
    return c;
  }());
  CHECK(r.failure_stage == "ingest");
}

TEST_CASE("unusable audio is excluded with a reason") {
  testing::TempDir dir;
  testing::write_wav(dir / "ok1.wav", testing::fm_tone(140, 10, 4, 1.0));
  testing::write_wav(dir / "ok2.wav", testing::fm_tone(200, 20, 4, 1.0));
  testing::write_wav(dir / "ok3.wav", testing::fm_tone(260, 5, 4, 1.0));
  testing::write_wav(dir / "quiet.wav", std::vector<float>(16000, 0.0f));
  std::ofstream(dir / "broken.wav") << "RIFF nonsense";
  std::vector<testing::ManifestRecord> records;
  for (const char* id : {"ok1", "ok2", "ok3", "quiet", "broken"}) {
    records.push_back({id, "s", "sad", std::string(id) + ".wav", "Some words here."});
  }
  testing::write_manifest(dir / "m.jsonl", records);
  std::ofstream(dir / "mock.json") << testing::blob_mock_fixture().dump();
  auto config = testing::mock_config(dir / "mock.json");
  config.num_clusters = 2;
  config.m = 1;
  config.n_percent = 100;
  auto client = make_backend_client(config);
  const auto r = run_static(config, dir / "m.jsonl", "s", EmotionLabel::sad, *client);
  REQUIRE_MESSAGE(r.complete, r.failure_message);
  CHECK(r.pool_ids.size() == 5);
  CHECK(r.excluded.contains("quiet"));
  CHECK(r.excluded.contains("broken"));
  CHECK(r.pitch.size() == 3);
  CHECK(subset(r.post_pitch, {"ok1", "ok2", "ok3"}));
}

TEST_CASE("result schema") {
  const auto r = reference_rows();
  const auto doc = r.to_json();
  CHECK(doc["schema_version"] == kResultSchemaVersion);
  const auto back = StaticSelectionResult::from_json(doc);
  CHECK(back.to_json() == doc);

  auto future = doc;
  future["schema_version"] = 2;
  CHECK(code_of([&] { StaticSelectionResult::from_json(future); }) == Errc::schema_version);
  auto broken = doc;
  broken.erase("stages");
  CHECK(code_of([&] { StaticSelectionResult::from_json(broken); }) == Errc::parse);

  testing::TempDir dir;
  CHECK(code_of([&] { read_result(dir / "missing.json"); }) == Errc::io);
  std::ofstream(dir / "garbage.json") << "{not json";
  CHECK(code_of([&] { read_result(dir / "garbage.json"); }) == Errc::parse);
}

TEST_CASE("report rows") {
  const auto text = render_report(reference_rows());
  CHECK(text.find("PromptID | CER | Resemb | WavLM | ES | Rank\n") != std::string::npos);
  CHECK(text.find("165 | 1.55% | 0.9366 | 0.8210 | 0.9837 | Top1\n") != std::string::npos);
  CHECK(text.find("112 | 2.01% | 0.9067 | 0.8174 | 0.9845 | Top2\n") != std::string::npos);
  CHECK(text.find("119 | 1.86% | 0.9168 | 0.7917 | 0.9761 | Top3\n") != std::string::npos);

  auto empty = reference_rows();
  empty.top_k.clear();
  CHECK(render_report(empty).find("no candidates") != std::string::npos);

  if (std::setlocale(LC_ALL, "de_DE.UTF-8") != nullptr) {
    CHECK(render_report(reference_rows()) == text);
    std::setlocale(LC_ALL, "C");
  }
}

TEST_CASE("dynamic selection over a stored result") {
  auto r = reference_rows();
  auto client = testing::mock_client(std::make_shared<MockBackend>(
      Json{{"semantic", {{"mode", "exact_match"}}}}));
  CHECK(run_dynamic(r, "transcript 119", *client).chosen == "119");
  CHECK(run_dynamic(r, "nothing alike", *client).chosen == "165");
  r.complete = false;
  CHECK(code_of([&] { run_dynamic(r, "x", *client); }) == Errc::incomplete_result);
}
