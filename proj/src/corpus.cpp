// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include "emopro/corpus.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <unordered_set>

#include "emopro/error.hpp"
#include "emopro/wav.hpp"

namespace emopro {

namespace {

std::string required_string(const nlohmann::json& record, const char* field,
                            std::size_t line_no) {
  auto it = record.find(field);
  if (it == record.end() || !it->is_string()) {
    throw Error(Errc::parse, "manifest line " + std::to_string(line_no) +
                                 ": missing or non-string field '" + field + "'");
  }
  return it->get<std::string>();
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

// Largest 16-bit code maps to 32767/32768; count anything at or above it.
constexpr float kClipLevel = 32767.0f / 32768.0f;

}  // namespace

CandidatePool load_manifest(const std::filesystem::path& manifest_path,
                            const std::string& speaker_id, EmotionLabel emotion) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(Errc::io, "cannot open manifest " + manifest_path.string());
  const auto base_dir = manifest_path.parent_path();

  CandidatePool pool;
  pool.speaker_id = speaker_id;
  pool.emotion = emotion;

  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  std::size_t records = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;

    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::parse, "manifest line " + std::to_string(line_no) +
                                   ": invalid JSON (" + e.what() + ")");
    }
    if (!record.is_object()) {
      throw Error(Errc::parse,
                  "manifest line " + std::to_string(line_no) + ": not a JSON object");
    }

    PromptCandidate c;
    c.id = required_string(record, "id", line_no);
    c.speaker_id = required_string(record, "speaker", line_no);
    const auto emotion_text = required_string(record, "emotion", line_no);
    try {
      c.emotion = parse_emotion(emotion_text);
    } catch (const Error& e) {
      throw Error(Errc::parse,
                  "manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    c.audio_path = base_dir / required_string(record, "audio", line_no);
    c.transcript = required_string(record, "text", line_no);

    if (c.id.empty()) {
      throw Error(Errc::parse, "manifest line " + std::to_string(line_no) + ": empty id");
    }
    if (!seen.insert(c.id).second) {
      throw Error(Errc::duplicate_id, "manifest line " + std::to_string(line_no) +
                                          ": duplicate id '" + c.id + "'");
    }
    ++records;

    if (c.speaker_id == speaker_id && c.emotion == emotion) {
      pool.candidates.push_back(std::move(c));
    }
  }

  if (pool.empty()) {
    throw Error(Errc::empty_pool, "no manifest records for speaker '" + speaker_id +
                                      "' and emotion '" +
                                      std::string(to_string(emotion)) + "' (" +
                                      std::to_string(records) + " records read)");
  }
  spdlog::info("loaded {} candidates for ({}, {}) from {} records", pool.size(),
               speaker_id, to_string(emotion), records);
  return pool;
}

AudioBuffer decode_audio(PromptCandidate& candidate) {
  const auto bytes = wav::read_file(candidate.audio_path);
  try {
    auto decoded = wav::decode(bytes);
    candidate.duration_s = decoded.audio.duration_s();
    return std::move(decoded.audio);
  } catch (const Error& e) {
    throw Error(e.code(), candidate.audio_path.string() + ": " + e.what());
  }
}

std::vector<std::string> ValidationReport::flags() const {
  std::vector<std::string> out;
  if (empty_transcript) out.emplace_back("empty_transcript");
  if (duration_out_of_range) out.emplace_back("duration");
  if (clipping) out.emplace_back("clipping");
  return out;
}

ValidationReport validate_candidate(const PromptCandidate& candidate,
                                    const AudioBuffer& audio,
                                    const ValidationLimits& limits) {
  ValidationReport report;
  report.empty_transcript =
      candidate.transcript.find_first_not_of(" \t\r\n") == std::string::npos;

  const double duration = audio.duration_s();
  report.duration_out_of_range =
      duration < limits.min_duration_s || duration > limits.max_duration_s;

  std::size_t clipped = 0;
  for (float s : audio.samples()) {
    if (std::fabs(s) >= kClipLevel) ++clipped;
  }
  report.clip_fraction = static_cast<double>(clipped) / static_cast<double>(audio.size());
  report.clipping = report.clip_fraction > limits.max_clip_fraction;
  return report;
}

}  // namespace emopro
