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

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>

#include "pcgdn/audio.hpp"
#include "pcgdn/common.hpp"
#include "pcgdn/nn/params.hpp"
#include "pcgdn/spectral.hpp"

namespace pcgdn::eval {

struct SpectrogramParams {
  double window_s = 0.064;
  double hop_s = 0.008;
  double floor_db = -200.0;  // value written where the magnitude is zero
};

// Short-time magnitude in dB, rows are frequency bins 0..nfft/2, columns are
// frames. Frames use a periodic Hann taper and zero-pad to nfft, the next
// power of two at or above the window length.
struct Spectrogram {
  nn::Mat db;
  int sample_rate_hz = 0;
  std::size_t window = 0, hop = 0, nfft = 0;

  double bin_hz(nn::Index bin) const { return static_cast<double>(bin) * sample_rate_hz / static_cast<double>(nfft); }
  double frame_time_s(nn::Index frame) const {
    return (static_cast<double>(frame) * static_cast<double>(hop) + static_cast<double>(window) / 2.0) / sample_rate_hz;
  }
};

inline std::size_t frame_count(std::size_t n, std::size_t window, std::size_t hop) {
  return n < window ? 0 : (n - window) / hop + 1;
}

inline Spectrogram spectrogram(const AudioSegment& seg, const SpectrogramParams& p = {}) {
  if (!(p.hop_s > 0.0) || p.window_s < p.hop_s) throw ConfigError("spectrogram: need window >= hop > 0");
  validate(seg);
  Spectrogram s;
  s.sample_rate_hz = seg.sample_rate_hz;
  s.window = static_cast<std::size_t>(std::llround(p.window_s * seg.sample_rate_hz));
  s.hop = static_cast<std::size_t>(std::llround(p.hop_s * seg.sample_rate_hz));
  if (s.hop == 0) throw ConfigError("spectrogram: hop shorter than one sample");
  if (s.window > seg.size())
    throw DataError(str_cat("spectrogram: window of ", s.window, " samples exceeds segment of ", seg.size()));
  s.nfft = next_pow2(s.window);
  const std::size_t frames = frame_count(seg.size(), s.window, s.hop);
  const auto bins = static_cast<nn::Index>(s.nfft / 2 + 1);
  s.db.resize(bins, static_cast<nn::Index>(frames));
  const auto taper = hann_window(s.window);
  std::vector<double> buf(s.nfft);
  for (std::size_t f = 0; f < frames; ++f) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (std::size_t i = 0; i < s.window; ++i) buf[i] = seg.samples[f * s.hop + i] * taper[i];
    const auto spec = fft(buf);
    for (nn::Index b = 0; b < bins; ++b) {
      const double mag = std::abs(spec[static_cast<std::size_t>(b)]);
      s.db(b, static_cast<nn::Index>(f)) = mag > 0.0 ? std::max(20.0 * std::log10(mag), p.floor_db) : p.floor_db;
    }
  }
  return s;
}

// CSV: header row of frame times, then one row per bin led by its frequency.
inline void write_csv(const Spectrogram& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write spectrogram CSV '" + path.string() + "'");
  out << "freq_hz";
  for (nn::Index f = 0; f < s.db.cols(); ++f) out << ',' << format_double(s.frame_time_s(f));
  out << '\n';
  for (nn::Index b = 0; b < s.db.rows(); ++b) {
    out << format_double(s.bin_hz(b));
    for (nn::Index f = 0; f < s.db.cols(); ++f) out << ',' << format_double(s.db(b, f));
    out << '\n';
  }
}

}  // namespace pcgdn::eval
