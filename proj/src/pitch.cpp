// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include "emopro/pitch.hpp"

#include <cmath>
#include <string>

#include "emopro/error.hpp"

namespace emopro {

namespace {

struct FrameGeometry {
  std::size_t frame = 0;     // samples per analysis frame
  std::size_t hop = 0;
  std::size_t window = 0;    // integration window of the difference function
  std::size_t lag_min = 0;
  std::size_t lag_max = 0;
};

FrameGeometry geometry(const PitchConfig& cfg, int sample_rate_hz) {
  const double sr = sample_rate_hz;
  FrameGeometry g;
  g.frame = static_cast<std::size_t>(std::lround(cfg.frame_size_s * sr));
  g.hop = static_cast<std::size_t>(std::lround(cfg.hop_s * sr));
  g.window = g.frame / 2;
  g.lag_min = static_cast<std::size_t>(std::floor(sr / cfg.f0_max_hz));
  g.lag_max = static_cast<std::size_t>(std::ceil(sr / cfg.f0_min_hz));
  if (g.lag_min < 2) g.lag_min = 2;
  return g;
}

// Returns the refined lag in samples, or nullopt when the frame is aperiodic.
std::optional<double> yin_frame(const float* x, const FrameGeometry& g,
                                double threshold, std::vector<double>& cmnd) {
  const std::size_t max_lag = g.lag_max;
  cmnd.assign(max_lag + 2, 1.0);

  double running = 0.0;
  for (std::size_t lag = 1; lag <= max_lag + 1; ++lag) {
    double d = 0.0;
    for (std::size_t j = 0; j < g.window; ++j) {
      const double diff = static_cast<double>(x[j]) - x[j + lag];
      d += diff * diff;
    }
    running += d;
    cmnd[lag] = running > 0.0 ? d * static_cast<double>(lag) / running : 1.0;
  }

  std::size_t lag = g.lag_min;
  while (lag <= max_lag && cmnd[lag] >= threshold) ++lag;
  if (lag > max_lag) return std::nullopt;
  while (lag + 1 <= max_lag && cmnd[lag + 1] < cmnd[lag]) ++lag;

  double refined = static_cast<double>(lag);
  const double a = cmnd[lag - 1];
  const double b = cmnd[lag];
  const double c = cmnd[lag + 1];
  const double denom = a - 2.0 * b + c;
  if (denom > 0.0) {
    const double shift = 0.5 * (a - c) / denom;
    if (std::fabs(shift) < 1.0) refined += shift;
  }
  return refined;
}

}  // namespace

void PitchConfig::validate(int sample_rate_hz) const {
  if (!(f0_min_hz > 0.0) || !(f0_min_hz < f0_max_hz)) {
    throw Error(Errc::invalid_argument, "pitch config requires 0 < f0_min < f0_max");
  }
  if (!(hop_s > 0.0) || !(frame_size_s > 0.0)) {
    throw Error(Errc::invalid_argument, "pitch frame size and hop must be positive");
  }
  if (!(yin_threshold > 0.0 && yin_threshold < 1.0)) {
    throw Error(Errc::invalid_argument, "yin_threshold must lie in (0, 1)");
  }
  const auto g = geometry(*this, sample_rate_hz);
  if (g.hop == 0) throw Error(Errc::invalid_argument, "hop shorter than one sample");
  // The difference function reads window + lag_max + 1 samples per frame.
  if (g.window + g.lag_max + 1 > g.frame) {
    throw Error(Errc::invalid_argument,
                "frame of " + std::to_string(g.frame) +
                    " samples cannot hold two periods of f0_min");
  }
}

std::size_t F0Contour::voiced_count() const {
  std::size_t n = 0;
  for (const auto& v : values) n += v.has_value() ? 1 : 0;
  return n;
}

F0Contour estimate_f0_contour(const AudioBuffer& audio, const PitchConfig& cfg) {
  cfg.validate(audio.sample_rate_hz());
  const auto g = geometry(cfg, audio.sample_rate_hz());
  const auto samples = audio.samples();
  if (samples.size() < g.frame) {
    throw Error(Errc::invalid_argument,
                "audio of " + std::to_string(samples.size()) +
                    " samples is shorter than one analysis frame");
  }

  F0Contour contour;
  contour.frame_hop_s = static_cast<double>(g.hop) / audio.sample_rate_hz();
  const std::size_t frames = 1 + (samples.size() - g.frame) / g.hop;
  contour.values.reserve(frames);

  std::vector<double> scratch;
  const double sr = audio.sample_rate_hz();
  for (std::size_t i = 0; i < frames; ++i) {
    const auto lag = yin_frame(samples.data() + i * g.hop, g, cfg.yin_threshold, scratch);
    std::optional<double> f0;
    if (lag) {
      const double hz = sr / *lag;
      if (hz >= cfg.f0_min_hz && hz <= cfg.f0_max_hz) f0 = hz;
    }
    contour.values.push_back(f0);
  }
  return contour;
}

PitchStats compute_pitch_stats(const F0Contour& contour, const PitchConfig& cfg) {
  PitchStats stats;
  stats.total_frames = contour.values.size();

  double sum = 0.0;
  for (const auto& v : contour.values) {
    if (v) {
      sum += *v;
      ++stats.voiced_frames;
    }
  }
  if (stats.voiced_frames < cfg.min_voiced || stats.voiced_frames == 0) {
    throw Error(Errc::insufficient_voicing,
                std::to_string(stats.voiced_frames) + " voiced frames, need " +
                    std::to_string(cfg.min_voiced));
  }

  const double n = static_cast<double>(stats.voiced_frames);
  stats.mean_hz = sum / n;
  double ss = 0.0;
  for (const auto& v : contour.values) {
    if (v) ss += (*v - stats.mean_hz) * (*v - stats.mean_hz);
  }
  stats.variance_hz2 = ss / n;
  return stats;
}

}  // namespace emopro
