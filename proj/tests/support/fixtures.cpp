// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include "fixtures.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "emopro/hashing.hpp"
#include "emopro/wav.hpp"

namespace emopro::testing {

std::vector<float> sine(double hz, double seconds, int sample_rate, double amp, double phase) {
  std::vector<float> out(static_cast<std::size_t>(std::lround(seconds * sample_rate)));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    out[i] = static_cast<float>(amp * std::sin(2.0 * std::numbers::pi * hz * t + phase));
  }
  return out;
}

std::vector<float> fm_tone(double fc, double dev, double rate_hz, double seconds,
                           int sample_rate, double amp) {
  std::vector<float> out(static_cast<std::size_t>(std::lround(seconds * sample_rate)));
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double phase = two_pi * fc * t - (dev / rate_hz) * std::cos(two_pi * rate_hz * t);
    out[i] = static_cast<float>(amp * std::sin(phase));
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const std::vector<float>& samples,
               int sample_rate) {
  wav::write_file(path, wav::encode(samples, 1, sample_rate));
}

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("emopro-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestRecord>& records) {
  std::ofstream out(path);
  for (const auto& r : records) {
    out << Json{{"id", r.id},
                {"speaker", r.speaker},
                {"emotion", r.emotion},
                {"audio", r.audio},
                {"text", r.transcript}}
               .dump()
        << '\n';
  }
}

BlobCorpus make_blob_corpus(const std::filesystem::path& dir, std::uint64_t seed) {
  BlobCorpus corpus;
  std::filesystem::create_directories(dir / "audio");
  SplitMix64 rng(seed);
  std::vector<ManifestRecord> records;
  for (std::size_t b = 0; b < BlobCorpus::kBlobs; ++b) {
    for (std::size_t i = 0; i < BlobCorpus::kPerBlob; ++i) {
      const std::string id = "b" + std::to_string(b) + "_" + std::to_string(i);
      const double fc = BlobCorpus::centre_hz(b) + (rng.uniform() * 2.0 - 1.0) * 1.5;
      const double dev = BlobCorpus::kDeviation[b] * (1.0 + (rng.uniform() * 2.0 - 1.0) * 0.03);
      write_wav(dir / "audio" / (id + ".wav"), fm_tone(fc, dev, 4.0, 1.0));
      records.push_back({id, "spk1", "happy", "audio/" + id + ".wav",
                         "Prompt number " + std::to_string(i) + " from group " +
                             std::to_string(b) + ", what a wonderful day!"});
      corpus.ids.push_back(id);
      corpus.blob_of[id] = b;
    }
  }
  // Decoys: other speaker, other emotion.
  write_wav(dir / "audio" / "decoy.wav", sine(200.0, 1.0));
  records.insert(records.begin() + 37,
                 {"x_other_speaker", "spk2", "happy", "audio/decoy.wav", "Not this one."});
  records.push_back({"x_other_emotion", "spk1", "sad", "audio/decoy.wav", "Nor this one."});

  corpus.manifest = dir / "manifest.jsonl";
  write_manifest(corpus.manifest, records);
  corpus.fixture = dir / "mock.json";
  std::ofstream(corpus.fixture) << blob_mock_fixture().dump(2) << '\n';
  return corpus;
}

Json blob_mock_fixture() {
  return {{"seed", 11},
          {"tts", {{"mode", "tone"}}},
          {"asr", {{"mode", "echo"}, {"drop_max", 3}}},
          {"embedding", {{"dim", 16}, {"jitter_max", 0.4}}},
          {"quality", {{"seeded", {1.5, 4.8}}}},
          {"coherence", {{"seeded", {0.2, 0.95}}}},
          {"semantic", {{"mode", "table"}, {"default", 0.5}}}};
}

std::unique_ptr<BackendClient> mock_client(std::shared_ptr<MockBackend> backend,
                                           std::shared_ptr<RequestCache> cache) {
  BackendSet set;
  for (BackendRole role : kAllRoles) {
    Endpoint ep;
    ep.model_id = "mock:" + std::string(to_string(role));
    ep.retries = 0;
    set.endpoints.emplace(role, ep);
  }
  if (!cache) cache = std::make_shared<RequestCache>();
  auto client = std::make_unique<BackendClient>(
      set, std::make_shared<MockTransport>(std::move(backend)), std::move(cache));
  client->set_sleeper([](std::chrono::duration<double>) {});
  return client;
}

SelectionConfig mock_config(const std::filesystem::path& fixture,
                            const std::filesystem::path& cache_dir) {
  SelectionConfig config;
  config.mock_fixture = fixture.string();
  config.cache_dir = cache_dir.string();
  return config;
}

std::string strip_timestamps(const std::string& result_json) {
  Json doc = Json::parse(result_json);
  doc.erase("timestamps");
  return doc.dump();
}

}  // namespace emopro::testing
