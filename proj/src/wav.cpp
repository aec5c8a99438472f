// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#include "emopro/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "emopro/error.hpp"

namespace emopro::wav {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}

std::uint32_t read_u32(std::string_view b, std::size_t at) {
  return static_cast<std::uint32_t>(read_u16(b, at)) |
         (static_cast<std::uint32_t>(read_u16(b, at + 2)) << 16);
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  put_u16(out, static_cast<std::uint16_t>(v & 0xffff));
  put_u16(out, static_cast<std::uint16_t>(v >> 16));
}

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(Errc::corrupt_audio, "corrupt WAV: " + what);
}

struct FormatChunk {
  std::uint16_t tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

FormatChunk parse_fmt(std::string_view body) {
  if (body.size() < 16) corrupt("fmt chunk shorter than 16 bytes");
  FormatChunk f;
  f.tag = read_u16(body, 0);
  f.channels = read_u16(body, 2);
  f.sample_rate = read_u32(body, 4);
  f.bits = read_u16(body, 14);
  if (f.tag == kFormatExtensible) {
    if (body.size() < 26) corrupt("extensible fmt chunk too short");
    // First two bytes of the SubFormat GUID carry the plain format tag.
    f.tag = read_u16(body, 24);
  }
  return f;
}

std::string parse_info_comment(std::string_view list_body) {
  if (list_body.size() < 4 || list_body.substr(0, 4) != "INFO") return {};
  std::size_t pos = 4;
  while (pos + 8 <= list_body.size()) {
    const auto id = list_body.substr(pos, 4);
    const std::uint32_t size = read_u32(list_body, pos + 4);
    pos += 8;
    if (pos + size > list_body.size()) return {};
    if (id == "ICMT") {
      auto text = list_body.substr(pos, size);
      while (!text.empty() && text.back() == '\0') text.remove_suffix(1);
      return std::string(text);
    }
    pos += size + (size & 1u);
  }
  return {};
}

}  // namespace

Decoded decode(std::string_view bytes) {
  if (bytes.size() < 12) corrupt("truncated RIFF header");
  if (bytes.substr(0, 4) != "RIFF" || bytes.substr(8, 4) != "WAVE") {
    corrupt("missing RIFF/WAVE signature");
  }

  std::optional<FormatChunk> fmt;
  std::optional<std::string_view> data;
  std::string comment;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const auto id = bytes.substr(pos, 4);
    const std::uint32_t size = read_u32(bytes, pos + 4);
    pos += 8;
    if (size > bytes.size() - pos) {
      corrupt("chunk '" + std::string(id) + "' runs past end of file");
    }
    const auto body = bytes.substr(pos, size);
    if (id == "fmt ") {
      fmt = parse_fmt(body);
    } else if (id == "data") {
      data = body;
    } else if (id == "LIST") {
      if (auto c = parse_info_comment(body); !c.empty()) comment = std::move(c);
    }
    pos += size + (size & 1u);
  }

  if (!fmt) corrupt("missing fmt chunk");
  if (!data) corrupt("missing data chunk");
  if (fmt->channels == 0) corrupt("zero channels");

  SampleFormat format;
  if (fmt->tag == kFormatPcm && fmt->bits == 16) {
    format = SampleFormat::pcm16;
  } else if (fmt->tag == kFormatFloat && fmt->bits == 32) {
    format = SampleFormat::float32;
  } else {
    throw Error(Errc::unsupported_audio,
                "unsupported WAV encoding (format tag " + std::to_string(fmt->tag) +
                    ", " + std::to_string(fmt->bits) + " bits)");
  }
  if (fmt->sample_rate < static_cast<std::uint32_t>(AudioBuffer::kMinSampleRate) ||
      fmt->sample_rate > static_cast<std::uint32_t>(AudioBuffer::kMaxSampleRate)) {
    throw Error(Errc::unsupported_audio,
                "sample rate " + std::to_string(fmt->sample_rate) + " Hz out of range");
  }

  const std::size_t width = format == SampleFormat::pcm16 ? 2 : 4;
  const std::size_t frame_bytes = width * fmt->channels;
  const std::size_t frames = data->size() / frame_bytes;
  if (frames == 0) corrupt("zero-length audio");

  std::vector<float> mono(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double sum = 0.0;
    for (std::size_t ch = 0; ch < fmt->channels; ++ch) {
      const std::size_t at = i * frame_bytes + ch * width;
      if (format == SampleFormat::pcm16) {
        sum += static_cast<std::int16_t>(read_u16(*data, at)) / 32768.0;
      } else {
        const std::uint32_t raw = read_u32(*data, at);
        float v;
        std::memcpy(&v, &raw, sizeof v);
        if (!std::isfinite(v)) corrupt("non-finite float sample");
        sum += std::clamp(v, -1.0f, 1.0f);
      }
    }
    mono[i] = static_cast<float>(sum / fmt->channels);
  }

  return Decoded{AudioBuffer(static_cast<int>(fmt->sample_rate), std::move(mono)),
                 fmt->channels, format, std::move(comment)};
}

std::string encode(std::span<const float> interleaved, int channels,
                   int sample_rate_hz, SampleFormat format, std::string_view comment) {
  if (channels <= 0 || interleaved.size() % static_cast<std::size_t>(channels) != 0) {
    throw Error(Errc::invalid_argument, "sample count not divisible by channel count");
  }
  const std::uint16_t width = format == SampleFormat::pcm16 ? 2 : 4;
  const auto data_size = static_cast<std::uint32_t>(interleaved.size() * width);

  std::string list;
  if (!comment.empty()) {
    std::string text(comment);
    text.push_back('\0');
    if (text.size() & 1u) text.push_back('\0');
    list = "INFO";
    list += "ICMT";
    put_u32(list, static_cast<std::uint32_t>(text.size()));
    list += text;
  }

  std::string out;
  out.reserve(44 + data_size + list.size() + 8);
  out += "RIFF";
  const std::uint32_t riff_size =
      4 + (8 + 16) + (8 + data_size + (data_size & 1u)) +
      (list.empty() ? 0 : 8 + static_cast<std::uint32_t>(list.size()));
  put_u32(out, riff_size);
  out += "WAVE";

  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, format == SampleFormat::pcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, static_cast<std::uint16_t>(channels));
  put_u32(out, static_cast<std::uint32_t>(sample_rate_hz));
  put_u32(out, static_cast<std::uint32_t>(sample_rate_hz) * channels * width);
  put_u16(out, static_cast<std::uint16_t>(channels * width));
  put_u16(out, static_cast<std::uint16_t>(8 * width));

  if (!list.empty()) {
    out += "LIST";
    put_u32(out, static_cast<std::uint32_t>(list.size()));
    out += list;
  }

  out += "data";
  put_u32(out, data_size);
  for (float s : interleaved) {
    if (format == SampleFormat::pcm16) {
      const double q = std::round(static_cast<double>(s) * 32768.0);
      put_u16(out, static_cast<std::uint16_t>(
                       static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0))));
    } else {
      std::uint32_t raw;
      std::memcpy(&raw, &s, sizeof raw);
      put_u32(out, raw);
    }
  }
  if (data_size & 1u) out.push_back('\0');
  return out;
}

std::string encode(const AudioBuffer& audio, SampleFormat format,
                   std::string_view comment) {
  return encode(audio.samples(), 1, audio.sample_rate_hz(), format, comment);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(Errc::io, "read failed: " + path.string());
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "write failed: " + path.string());
}

}  // namespace emopro::wav
