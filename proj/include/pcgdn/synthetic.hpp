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
#include <string>
#include <vector>

#include "pcgdn/audio.hpp"
#include "pcgdn/common.hpp"

// PCG-like test signals: periodic S1/S2 transients plus class-dependent
// murmurs. Used for fixtures, the toy corpus tool and the desk-scale
// experiments; not a physiological model.
namespace pcgdn::synth {

struct PcgOptions {
  int sample_rate_hz = 2000;
  double duration_s = 1.5;
  double min_bpm = 110.0;
  double max_bpm = 150.0;
  double murmur_level = 0.35;  // murmur amplitude relative to S1
};

namespace detail {

// Gaussian-windowed tone burst centred at `t0`.
inline void add_burst(std::vector<double>& x, int rate, double t0, double width_s, double freq, double amp,
                      double phase) {
  const auto lo = static_cast<std::int64_t>(std::floor((t0 - 3 * width_s) * rate));
  const auto hi = static_cast<std::int64_t>(std::ceil((t0 + 3 * width_s) * rate));
  for (std::int64_t i = std::max<std::int64_t>(lo, 0); i < std::min<std::int64_t>(hi, std::ssize(x)); ++i) {
    const double t = static_cast<double>(i) / rate;
    const double u = (t - t0) / width_s;
    x[static_cast<std::size_t>(i)] += amp * std::exp(-0.5 * u * u) * std::sin(2 * std::numbers::pi * freq * t + phase);
  }
}

// Band-limited murmur between t_start and t_end with a shaped envelope.
// shape: 0 flat (holosystolic), 1 diamond (crescendo-decrescendo),
// 2 decrescendo, 3 crescendo.
inline void add_murmur(std::vector<double>& x, int rate, double t_start, double t_end, double f_lo, double f_hi,
                       double amp, int shape, Rng& rng) {
  constexpr int kPartials = 6;
  double freqs[kPartials], phases[kPartials];
  for (int p = 0; p < kPartials; ++p) {
    freqs[p] = rng.uniform(f_lo, f_hi);
    phases[p] = rng.uniform(0.0, 2 * std::numbers::pi);
  }
  const auto lo = static_cast<std::int64_t>(t_start * rate);
  const auto hi = static_cast<std::int64_t>(t_end * rate);
  for (std::int64_t i = std::max<std::int64_t>(lo, 0); i < std::min<std::int64_t>(hi, std::ssize(x)); ++i) {
    const double t = static_cast<double>(i) / rate;
    const double u = (t - t_start) / (t_end - t_start);
    double env = 1.0;
    switch (shape) {
      case 1: env = 1.0 - std::abs(2.0 * u - 1.0); break;
      case 2: env = 1.0 - u; break;
      case 3: env = u; break;
      default: env = std::sin(std::numbers::pi * std::min(1.0, 8.0 * std::min(u, 1.0 - u)) / 2.0); break;
    }
    double v = 0.0;
    for (int p = 0; p < kPartials; ++p) v += std::sin(2 * std::numbers::pi * freqs[p] * t + phases[p]);
    x[static_cast<std::size_t>(i)] += amp * env * v / std::sqrt(static_cast<double>(kPartials));
  }
}

}  // namespace detail

// One recording of class `cls`, peak-normalized to 1.
inline AudioSegment pcg(PcgClass cls, std::uint64_t seed, const PcgOptions& opt = {}) {
  Rng rng(seed);
  const int rate = opt.sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::llround(opt.duration_s * rate));
  std::vector<double> x(n, 0.0);
  const double period = 60.0 / rng.uniform(opt.min_bpm, opt.max_bpm);
  const double systole = period * rng.uniform(0.36, 0.42);
  const double f1 = rng.uniform(45.0, 60.0);
  const double f2 = rng.uniform(70.0, 100.0);
  double t = -rng.uniform(0.0, period);
  while (t < opt.duration_s + period) {
    const double jitter = rng.uniform(-0.01, 0.01);
    const double s1 = t + jitter;
    const double s2 = s1 + systole;
    detail::add_burst(x, rate, s1, 0.018, f1, 1.0, rng.uniform(0.0, 6.28));
    detail::add_burst(x, rate, s2, 0.014, f2, rng.uniform(0.55, 0.75), rng.uniform(0.0, 6.28));
    const double a = opt.murmur_level;
    switch (cls) {
      case PcgClass::N: break;
      case PcgClass::AS: detail::add_murmur(x, rate, s1 + 0.05, s2 - 0.04, 140.0, 240.0, a, 1, rng); break;
      case PcgClass::MR: detail::add_murmur(x, rate, s1 + 0.03, s2 - 0.02, 100.0, 180.0, a, 0, rng); break;
      case PcgClass::MS:
        detail::add_murmur(x, rate, s2 + 0.08, s1 + period - 0.02, 40.0, 90.0, 1.2 * a, 2, rng);
        detail::add_burst(x, rate, s2 + 0.07, 0.008, 160.0, 0.4, 0.0);  // opening snap
        break;
      case PcgClass::MVP:
        detail::add_burst(x, rate, s1 + 0.55 * systole, 0.006, 180.0, 0.6, 0.0);  // mid-systolic click
        detail::add_murmur(x, rate, s1 + 0.6 * systole, s2 - 0.01, 150.0, 260.0, a, 3, rng);
        break;
    }
    t += period;
  }
  AudioSegment seg;
  seg.samples = std::move(x);
  seg.sample_rate_hz = rate;
  seg.source_id = str_cat("synth_", to_string(cls), "_", seed);
  seg.label = cls;
  return normalize(std::move(seg));
}

}  // namespace pcgdn::synth
