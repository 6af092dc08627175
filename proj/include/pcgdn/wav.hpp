// Copyright 2026 The pcgdn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "pcgdn/audio.hpp"
#include "pcgdn/common.hpp"

namespace pcgdn::wav {

enum class SampleFormat { Pcm16, Float32 };

struct Info {
  int sample_rate_hz = 0;
  int channels = 0;
  int bits_per_sample = 0;
  bool is_float = false;
  std::size_t frames = 0;
};

namespace detail {

static_assert(std::endian::native == std::endian::little, "WAV codec assumes a little-endian host");

inline std::uint16_t u16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
inline std::uint32_t u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

struct Parsed {
  Info info;
  const std::uint8_t* data = nullptr;
  std::size_t data_bytes = 0;
};

inline Parsed parse(const std::vector<std::uint8_t>& bytes, const std::string& what) {
  auto fail = [&](const std::string& why) { return DataError("corrupt WAV '" + what + "': " + why); };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw fail("missing RIFF/WAVE header");

  Parsed out;
  bool have_fmt = false;
  std::uint16_t format_tag = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) throw fail("truncated fmt chunk");
      format_tag = u16(bytes.data() + body);
      out.info.channels = u16(bytes.data() + body + 2);
      out.info.sample_rate_hz = static_cast<int>(u32(bytes.data() + body + 4));
      out.info.bits_per_sample = u16(bytes.data() + body + 14);
      if (format_tag == 0xFFFE && size >= 26) format_tag = u16(bytes.data() + body + 24);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw fail("data chunk before fmt chunk");
      const std::size_t avail = bytes.size() - body;
      if (size > avail) throw fail("truncated data chunk");
      out.data = bytes.data() + body;
      out.data_bytes = size;
      break;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw fail("no fmt chunk");
  if (out.data == nullptr) throw fail("no data chunk");
  if (out.info.channels <= 0 || out.info.sample_rate_hz <= 0) throw fail("invalid channel count or rate");

  const int bits = out.info.bits_per_sample;
  if (format_tag == 1 && (bits == 8 || bits == 16 || bits == 24 || bits == 32)) {
    out.info.is_float = false;
  } else if (format_tag == 3 && (bits == 32 || bits == 64)) {
    out.info.is_float = true;
  } else {
    throw fail(str_cat("unsupported encoding (format ", format_tag, ", ", bits, " bits)"));
  }
  const std::size_t frame_bytes = static_cast<std::size_t>(bits / 8) * out.info.channels;
  out.info.frames = out.data_bytes / frame_bytes;
  return out;
}

inline double decode_sample(const std::uint8_t* p, int bits, bool is_float) {
  if (is_float) {
    if (bits == 32) {
      float f;
      std::memcpy(&f, p, 4);
      return f;
    }
    double d;
    std::memcpy(&d, p, 8);
    return d;
  }
  switch (bits) {
    case 8: return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16: return static_cast<std::int16_t>(u16(p)) / 32768.0;
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v |= ~0xFFFFFF;
      return v / 8388608.0;
    }
    default: return static_cast<std::int32_t>(u32(p)) / 2147483648.0;
  }
}

inline void put16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v & 0xFF));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}
inline void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

}  // namespace detail

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Info probe(const std::vector<std::uint8_t>& bytes, const std::string& what) {
  return detail::parse(bytes, what).info;
}

inline Info probe(const std::filesystem::path& path) {
  // Header-only probe still reads the file; recordings are small.
  return detail::parse(read_bytes(path), path.string()).info;
}

// Decodes a WAV byte buffer. Multi-channel input is averaged to mono.
inline AudioSegment decode(const std::vector<std::uint8_t>& bytes, const std::string& source_id) {
  const auto parsed = detail::parse(bytes, source_id);
  const auto& info = parsed.info;
  const int step = info.bits_per_sample / 8;
  AudioSegment seg;
  seg.sample_rate_hz = info.sample_rate_hz;
  seg.source_id = source_id;
  seg.samples.resize(info.frames);
  const std::uint8_t* p = parsed.data;
  for (std::size_t f = 0; f < info.frames; ++f) {
    double acc = 0.0;
    for (int c = 0; c < info.channels; ++c, p += step)
      acc += detail::decode_sample(p, info.bits_per_sample, info.is_float);
    seg.samples[f] = acc / info.channels;
  }
  if (seg.samples.empty()) throw DataError("WAV '" + source_id + "' has no samples");
  if (!all_finite(seg.samples)) throw DataError("WAV '" + source_id + "' contains non-finite samples");
  return seg;
}

inline AudioSegment read(const std::filesystem::path& path, std::string source_id = {}) {
  if (source_id.empty()) source_id = path.stem().string();
  return decode(read_bytes(path), source_id);
}

inline std::vector<std::uint8_t> encode(const AudioSegment& seg, SampleFormat format) {
  const int bits = format == SampleFormat::Pcm16 ? 16 : 32;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(seg.samples.size() * (bits / 8));
  std::vector<std::uint8_t> b;
  b.reserve(44 + data_bytes);
  for (char c : std::string_view("RIFF")) b.push_back(static_cast<std::uint8_t>(c));
  detail::put32(b, 36 + data_bytes);
  for (char c : std::string_view("WAVEfmt ")) b.push_back(static_cast<std::uint8_t>(c));
  detail::put32(b, 16);
  detail::put16(b, format == SampleFormat::Pcm16 ? 1 : 3);
  detail::put16(b, 1);
  detail::put32(b, static_cast<std::uint32_t>(seg.sample_rate_hz));
  detail::put32(b, static_cast<std::uint32_t>(seg.sample_rate_hz * (bits / 8)));
  detail::put16(b, static_cast<std::uint16_t>(bits / 8));
  detail::put16(b, static_cast<std::uint16_t>(bits));
  for (char c : std::string_view("data")) b.push_back(static_cast<std::uint8_t>(c));
  detail::put32(b, data_bytes);
  for (double v : seg.samples) {
    if (format == SampleFormat::Pcm16) {
      const double clipped = std::clamp(v, -1.0, 1.0);
      const auto q = static_cast<std::int16_t>(std::lround(std::clamp(clipped * 32768.0, -32768.0, 32767.0)));
      detail::put16(b, static_cast<std::uint16_t>(q));
    } else {
      const float f = static_cast<float>(v);
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      detail::put32(b, u);
    }
  }
  return b;
}

inline void write(const std::filesystem::path& path, const AudioSegment& seg,
                  SampleFormat format = SampleFormat::Float32) {
  validate(seg);
  const auto bytes = encode(seg, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace pcgdn::wav
