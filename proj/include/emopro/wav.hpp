// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "emopro/types.hpp"

namespace emopro::wav {

enum class SampleFormat { pcm16, float32 };

struct Decoded {
  AudioBuffer audio;       // mono mixdown
  int channels = 1;        // channel count in the file
  SampleFormat format = SampleFormat::pcm16;
  std::string comment;     // LIST/INFO/ICMT text, empty if absent
};

/// Parses RIFF/WAVE bytes. Multi-channel input is averaged to mono.
/// Errors: Errc::corrupt_audio (bad/truncated structure, no samples),
/// Errc::unsupported_audio (encoding other than 16-bit PCM or 32-bit float).
Decoded decode(std::string_view bytes);

/// `interleaved` holds frames of `channels` samples each. 16-bit encoding
/// quantizes with a 32768 scale, so decode(encode(x)) is within 2^-15 of x.
std::string encode(std::span<const float> interleaved, int channels,
                   int sample_rate_hz, SampleFormat format = SampleFormat::pcm16,
                   std::string_view comment = {});

std::string encode(const AudioBuffer& audio,
                   SampleFormat format = SampleFormat::pcm16,
                   std::string_view comment = {});

/// Throws Error(Errc::io) when the file cannot be read.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace emopro::wav
