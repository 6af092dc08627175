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

// Hand-rolled generators for property tests. Every case is derived from a
// case index so a failure can be replayed by its seed.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "pcgdn/audio.hpp"
#include "pcgdn/common.hpp"

namespace gen {

inline constexpr int kCases = 100;

inline pcgdn::Rng rng_for(std::uint64_t property, int case_index) {
  return pcgdn::Rng(pcgdn::derive_seed(property, {static_cast<std::uint64_t>(case_index)}));
}

inline std::vector<double> gaussian(pcgdn::Rng& r, std::size_t n, double scale = 1.0) {
  std::vector<double> x(n);
  for (auto& v : x) v = scale * r.normal();
  return x;
}

// Sum of a few sines strictly below max_hz.
inline std::vector<double> band_limited(pcgdn::Rng& r, std::size_t n, int rate, double max_hz) {
  std::vector<double> x(n, 0.0);
  const int tones = static_cast<int>(r.uniform_int(1, 4));
  for (int t = 0; t < tones; ++t) {
    const double f = r.uniform(5.0, max_hz), a = r.uniform(0.1, 1.0), ph = r.uniform(0.0, 6.28);
    for (std::size_t i = 0; i < n; ++i) x[i] += a * std::sin(2 * std::numbers::pi * f * static_cast<double>(i) / rate + ph);
  }
  return x;
}

inline pcgdn::AudioSegment segment(std::vector<double> x, int rate, std::string id = "gen") {
  pcgdn::AudioSegment s;
  s.samples = std::move(x);
  s.sample_rate_hz = rate;
  s.source_id = std::move(id);
  return s;
}

inline std::vector<double> sine(double hz, std::size_t n, int rate, double amp = 1.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2 * std::numbers::pi * hz * static_cast<double>(i) / rate);
  return x;
}

}  // namespace gen
