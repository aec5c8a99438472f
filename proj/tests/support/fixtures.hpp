// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "emopro/backend_client.hpp"
#include "emopro/config.hpp"
#include "emopro/mock_backend.hpp"
#include "emopro/types.hpp"

namespace emopro::testing {

std::vector<float> sine(double hz, double seconds, int sample_rate = 16000, double amp = 0.5,
                        double phase = 0.0);

/// Instantaneous frequency fc + dev * sin(2 pi rate t).
std::vector<float> fm_tone(double fc, double dev, double rate_hz, double seconds,
                           int sample_rate = 16000, double amp = 0.5);

void write_wav(const std::filesystem::path& path, const std::vector<float>& samples,
               int sample_rate = 16000);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct ManifestRecord {
  std::string id;
  std::string speaker;
  std::string emotion;
  std::string audio;  // relative to the manifest
  std::string transcript;
};

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestRecord>& records);

/// Ten pitch blobs of twenty 1 s FM tones each (speaker "spk1", happy),
/// plus a few records of other speakers/emotions that must be filtered out.
struct BlobCorpus {
  static constexpr std::size_t kBlobs = 10;
  static constexpr std::size_t kPerBlob = 20;
  static constexpr std::array<double, kBlobs> kDeviation = {4, 20, 8, 28, 12, 2, 24, 16, 6, 30};
  static double centre_hz(std::size_t blob) { return 110.0 + 25.0 * static_cast<double>(blob); }

  std::filesystem::path manifest;
  std::filesystem::path fixture;
  std::vector<std::string> ids;  // pool order
  std::map<std::string, std::size_t> blob_of;
};

BlobCorpus make_blob_corpus(const std::filesystem::path& dir, std::uint64_t seed = 7);

/// Seeded scores for every role; deterministic for any candidate set.
Json blob_mock_fixture();

/// Client over an in-process mock with an in-memory cache and no backoff.
std::unique_ptr<BackendClient> mock_client(std::shared_ptr<MockBackend> backend,
                                           std::shared_ptr<RequestCache> cache = nullptr);

/// Config with mock_fixture set and every role enabled.
SelectionConfig mock_config(const std::filesystem::path& fixture,
                            const std::filesystem::path& cache_dir = {});

/// Result JSON without the timestamps, for run-to-run comparison.
std::string strip_timestamps(const std::string& result_json);

}  // namespace emopro::testing
