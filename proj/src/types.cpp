// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include "emopro/types.hpp"

#include <cmath>

#include "emopro/error.hpp"

namespace emopro {

std::string_view to_string(EmotionLabel emotion) {
  switch (emotion) {
    case EmotionLabel::happy: return "happy";
    case EmotionLabel::sad: return "sad";
    case EmotionLabel::anger: return "anger";
    case EmotionLabel::surprised: return "surprised";
    case EmotionLabel::comfort: return "comfort";
  }
  return "happy";
}

EmotionLabel parse_emotion(std::string_view text) {
  for (EmotionLabel emotion : kAllEmotions) {
    if (to_string(emotion) == text) return emotion;
  }
  throw Error(Errc::parse, "unknown emotion label '" + std::string(text) + "'");
}

AudioBuffer::AudioBuffer(int sample_rate_hz, std::vector<float> samples)
    : sample_rate_hz_(sample_rate_hz), samples_(std::move(samples)) {
  if (sample_rate_hz_ < kMinSampleRate || sample_rate_hz_ > kMaxSampleRate) {
    throw Error(Errc::invalid_argument,
                "sample rate " + std::to_string(sample_rate_hz_) +
                    " Hz outside [8000, 192000]");
  }
  if (samples_.empty()) {
    throw Error(Errc::invalid_argument, "audio buffer has no samples");
  }
  for (float s : samples_) {
    if (!std::isfinite(s) || s < -1.0f || s > 1.0f) {
      throw Error(Errc::invalid_argument, "audio sample outside [-1, 1]");
    }
  }
}

const PromptCandidate* CandidatePool::find(std::string_view id) const {
  for (const auto& c : candidates) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

std::vector<std::string> CandidatePool::ids() const {
  std::vector<std::string> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(c.id);
  return out;
}

}  // namespace emopro
