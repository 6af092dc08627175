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
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcgdn/common.hpp"

namespace pcgdn {

// Diagnostic classes of the five-class PCG corpus.
enum class PcgClass { N = 0, AS = 1, MS = 2, MR = 3, MVP = 4 };

inline constexpr int kNumClasses = 5;
inline constexpr std::array<PcgClass, kNumClasses> kAllClasses = {
    PcgClass::N, PcgClass::AS, PcgClass::MS, PcgClass::MR, PcgClass::MVP};

inline std::string_view to_string(PcgClass c) {
  switch (c) {
    case PcgClass::N: return "N";
    case PcgClass::AS: return "AS";
    case PcgClass::MS: return "MS";
    case PcgClass::MR: return "MR";
    case PcgClass::MVP: return "MVP";
  }
  return "?";
}

inline std::optional<PcgClass> parse_class(std::string_view s) {
  for (auto c : kAllClasses)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

// A fixed-rate mono amplitude sequence with provenance.
struct AudioSegment {
  std::vector<double> samples;
  int sample_rate_hz = 0;
  std::string source_id;
  double offset_s = 0.0;
  std::optional<PcgClass> label;

  double duration_s() const {
    return static_cast<double>(samples.size()) / static_cast<double>(sample_rate_hz);
  }
  std::size_t size() const { return samples.size(); }
};

inline bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

inline void validate(const AudioSegment& seg) {
  if (seg.samples.empty()) throw DataError("empty audio segment '" + seg.source_id + "'");
  if (seg.sample_rate_hz <= 0)
    throw DataError(str_cat("segment '", seg.source_id, "' has non-positive sample rate"));
  if (!all_finite(seg.samples))
    throw DataError("segment '" + seg.source_id + "' contains non-finite samples");
}

inline double energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

inline double rms(std::span<const double> x) {
  return x.empty() ? 0.0 : std::sqrt(energy(x) / static_cast<double>(x.size()));
}

inline double peak(std::span<const double> x) {
  double p = 0.0;
  for (double v : x) p = std::max(p, std::abs(v));
  return p;
}

// Peak normalization: max |sample| becomes 1, all-zero input stays zero.
inline AudioSegment normalize(AudioSegment seg) {
  if (seg.samples.empty()) throw DataError("cannot normalize an empty segment");
  if (!all_finite(seg.samples)) throw DataError("cannot normalize non-finite samples");
  const double p = peak(seg.samples);
  if (p > 0.0)
    for (double& v : seg.samples) v /= p;
  return seg;
}

// Returned by snr_db when test equals reference exactly.
inline constexpr double kInfiniteSnr = std::numeric_limits<double>::infinity();

inline double snr_db(std::span<const double> reference, std::span<const double> test) {
  if (reference.size() != test.size())
    throw DataError(str_cat("snr_db: length mismatch (", reference.size(), " vs ", test.size(), ")"));
  const double signal = energy(reference);
  if (signal == 0.0) throw DataError("snr_db: reference is all-zero");
  double residual = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = test[i] - reference[i];
    residual += d * d;
  }
  if (residual == 0.0) return kInfiniteSnr;
  return 10.0 * std::log10(signal / residual);
}

inline double snr_db(const AudioSegment& reference, const AudioSegment& test) {
  if (reference.sample_rate_hz != test.sample_rate_hz)
    throw DataError("snr_db: sample-rate mismatch");
  return snr_db(std::span<const double>(reference.samples), std::span<const double>(test.samples));
}

}  // namespace pcgdn
