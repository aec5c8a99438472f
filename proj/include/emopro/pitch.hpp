// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "emopro/types.hpp"

namespace emopro {

struct PitchConfig {
  double frame_size_s = 0.040;
  double hop_s = 0.010;
  double f0_min_hz = 60.0;
  double f0_max_hz = 500.0;
  double yin_threshold = 0.15;
  std::size_t min_voiced = 10;

  /// Throws Error(Errc::invalid_argument) if the config cannot analyse
  /// audio at `sample_rate_hz` (frame must hold two periods of f0_min).
  void validate(int sample_rate_hz) const;
};

/// One entry per hop-aligned frame; std::nullopt marks an unvoiced frame.
struct F0Contour {
  double frame_hop_s = 0.0;
  std::vector<std::optional<double>> values;

  std::size_t voiced_count() const;
};

struct PitchStats {
  double mean_hz = 0.0;
  double variance_hz2 = 0.0;  // population variance
  std::size_t voiced_frames = 0;
  std::size_t total_frames = 0;
};

/// YIN: cumulative-mean-normalized difference per frame, first dip below
/// `yin_threshold` followed down to its local minimum, refined by
/// parabolic interpolation. Frames with no dip, or whose estimate falls
/// outside [f0_min, f0_max], are unvoiced.
/// Errors: Errc::invalid_argument if the audio is shorter than one frame.
F0Contour estimate_f0_contour(const AudioBuffer& audio, const PitchConfig& cfg);

/// Mean and population variance over voiced frames.
/// Errors: Errc::insufficient_voicing when fewer than cfg.min_voiced frames
/// are voiced.
PitchStats compute_pitch_stats(const F0Contour& contour, const PitchConfig& cfg);

}  // namespace emopro
