// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emopro {

enum class EmotionLabel { happy, sad, anger, surprised, comfort };

inline constexpr std::array<EmotionLabel, 5> kAllEmotions = {
    EmotionLabel::happy, EmotionLabel::sad, EmotionLabel::anger,
    EmotionLabel::surprised, EmotionLabel::comfort};

std::string_view to_string(EmotionLabel emotion);

/// Throws Error(Errc::parse) for anything outside the closed set.
EmotionLabel parse_emotion(std::string_view text);

struct PromptCandidate {
  std::string id;
  std::string speaker_id;
  EmotionLabel emotion = EmotionLabel::happy;
  std::filesystem::path audio_path;
  std::string transcript;
  double duration_s = 0.0;  // filled at decode
};

/// Mono PCM audio with samples in [-1, 1].
class AudioBuffer {
 public:
  static constexpr int kMinSampleRate = 8000;
  static constexpr int kMaxSampleRate = 192000;

  /// Validates the invariants; throws Error(Errc::invalid_argument).
  AudioBuffer(int sample_rate_hz, std::vector<float> samples);

  int sample_rate_hz() const noexcept { return sample_rate_hz_; }
  std::span<const float> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double duration_s() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_hz_;
  }

 private:
  int sample_rate_hz_;
  std::vector<float> samples_;
};

/// Candidates of exactly one (speaker, emotion) pair, in manifest order.
struct CandidatePool {
  std::string speaker_id;
  EmotionLabel emotion = EmotionLabel::happy;
  std::vector<PromptCandidate> candidates;

  std::size_t size() const noexcept { return candidates.size(); }
  bool empty() const noexcept { return candidates.empty(); }
  const PromptCandidate* find(std::string_view id) const;
  std::vector<std::string> ids() const;
};

}  // namespace emopro
