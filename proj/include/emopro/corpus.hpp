// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "emopro/types.hpp"

namespace emopro {

/// Reads a JSON Lines manifest and keeps the records of one
/// (speaker, emotion) pair in file order. Each record is
/// `{"id", "speaker", "emotion", "audio", "text"}`; `audio` is resolved
/// against the manifest's directory.
///
/// Errors: Errc::io (unreadable file), Errc::parse (malformed line, with
/// its 1-based line number), Errc::duplicate_id (anywhere in the file),
/// Errc::empty_pool (no record matches).
CandidatePool load_manifest(const std::filesystem::path& manifest_path,
                            const std::string& speaker_id, EmotionLabel emotion);

/// Decodes the candidate's WAV file to mono and records its duration.
AudioBuffer decode_audio(PromptCandidate& candidate);

struct ValidationLimits {
  double min_duration_s = 0.5;
  double max_duration_s = 30.0;
  double max_clip_fraction = 0.01;
};

struct ValidationReport {
  bool empty_transcript = false;
  bool duration_out_of_range = false;
  bool clipping = false;
  double clip_fraction = 0.0;

  bool ok() const { return !empty_transcript && !duration_out_of_range && !clipping; }
  std::vector<std::string> flags() const;
};

ValidationReport validate_candidate(const PromptCandidate& candidate,
                                    const AudioBuffer& audio,
                                    const ValidationLimits& limits = {});

}  // namespace emopro
