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
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

#include "pcgdn/audio.hpp"
#include "pcgdn/common.hpp"

namespace pcgdn {

// Band-limited rational resampler: Kaiser-windowed sinc interpolation with
// the cutoff placed below the lower of the two Nyquist frequencies.
struct ResamplerDesign {
  double rolloff = 0.9;        // cutoff as a fraction of the lower Nyquist
  double zero_crossings = 24;  // kernel half-width, in cutoff periods
  double kaiser_beta = 8.6;
};

namespace detail {

inline double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

inline std::vector<double> phase_weights(double frac, std::int64_t first, std::int64_t last, double g,
                                         double half, double beta) {
  const double norm = std::cyl_bessel_i(0.0, beta);
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(last - first + 1));
  for (std::int64_t r = first; r <= last; ++r) {
    const double d = frac - static_cast<double>(r);
    const double u = d / half;
    const double win = std::abs(u) >= 1.0 ? 0.0 : std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - u * u)) / norm;
    w.push_back(g * sinc(g * d) * win);
  }
  return w;
}

struct PolyphaseBank {
  std::vector<std::int64_t> first_tap;       // per phase, relative to the base input index
  std::vector<std::vector<double>> weights;  // per phase
};

inline PolyphaseBank design_bank(std::int64_t up, double g, double half, double beta) {
  PolyphaseBank bank;
  bank.first_tap.resize(static_cast<std::size_t>(up));
  bank.weights.resize(static_cast<std::size_t>(up));
  for (std::int64_t p = 0; p < up; ++p) {
    const double frac = static_cast<double>(p) / static_cast<double>(up);
    const auto r0 = static_cast<std::int64_t>(std::ceil(frac - half));
    const auto r1 = static_cast<std::int64_t>(std::floor(frac + half));
    bank.first_tap[p] = r0;
    bank.weights[p] = phase_weights(frac, r0, r1, g, half, beta);
  }
  return bank;
}

}  // namespace detail

// Output length for n_in samples: round(n_in * fs_out / fs_in), at least 1.
inline std::size_t resampled_length(std::size_t n_in, int fs_in, int fs_out) {
  if (fs_in == fs_out) return n_in;
  const auto n = static_cast<std::int64_t>(n_in);
  return static_cast<std::size_t>(std::max<std::int64_t>(1, (n * fs_out + fs_in / 2) / fs_in));
}

inline AudioSegment resample(const AudioSegment& seg, int target_rate_hz, const ResamplerDesign& design = {}) {
  if (target_rate_hz <= 0) throw ConfigError(str_cat("resample: target rate must be positive, got ", target_rate_hz));
  if (seg.samples.empty()) throw DataError("resample: empty segment '" + seg.source_id + "'");
  if (seg.sample_rate_hz <= 0) throw DataError("resample: segment has non-positive sample rate");
  if (seg.sample_rate_hz == target_rate_hz) return seg;

  const std::int64_t fs_in = seg.sample_rate_hz;
  const std::int64_t fs_out = target_rate_hz;
  const std::int64_t div = std::gcd(fs_in, fs_out);
  const std::int64_t up = fs_out / div;    // output step is down/up input samples
  const std::int64_t down = fs_in / div;

  const double cutoff_hz = 0.5 * static_cast<double>(std::min(fs_in, fs_out)) * design.rolloff;
  const double g = 2.0 * cutoff_hz / static_cast<double>(fs_in);  // normalized to input rate
  const double half = design.zero_crossings / g;                   // kernel half-width, input samples

  const auto n_in = static_cast<std::int64_t>(seg.samples.size());
  const auto n_out = static_cast<std::int64_t>(resampled_length(seg.samples.size(), seg.sample_rate_hz, target_rate_hz));

  AudioSegment out;
  out.sample_rate_hz = target_rate_hz;
  out.source_id = seg.source_id;
  out.offset_s = seg.offset_s;
  out.label = seg.label;
  out.samples.assign(static_cast<std::size_t>(n_out), 0.0);

  const auto& x = seg.samples;
  auto accumulate = [&](std::int64_t base, std::int64_t first, const std::vector<double>& w) {
    double acc = 0.0;
    std::int64_t k = base + first;
    std::size_t j = 0;
    if (k < 0) {
      j = static_cast<std::size_t>(-k);
      k = 0;
    }
    for (; j < w.size() && k < n_in; ++j, ++k) acc += w[j] * x[static_cast<std::size_t>(k)];
    return acc;
  };

  if (up <= 1024) {
    const auto bank = detail::design_bank(up, g, half, design.kaiser_beta);
    for (std::int64_t n = 0; n < n_out; ++n) {
      const std::int64_t num = n * down;
      const std::int64_t base = num / up;
      const std::int64_t phase = num % up;
      out.samples[static_cast<std::size_t>(n)] = accumulate(base, bank.first_tap[phase], bank.weights[phase]);
    }
  } else {
    // Irregular ratios: design each output phase on the fly.
    for (std::int64_t n = 0; n < n_out; ++n) {
      const std::int64_t num = n * down;
      const double frac = static_cast<double>(num % up) / static_cast<double>(up);
      const auto r0 = static_cast<std::int64_t>(std::ceil(frac - half));
      const auto r1 = static_cast<std::int64_t>(std::floor(frac + half));
      const auto w = detail::phase_weights(frac, r0, r1, g, half, design.kaiser_beta);
      out.samples[static_cast<std::size_t>(n)] = accumulate(num / up, r0, w);
    }
  }
  return out;
}

}  // namespace pcgdn
