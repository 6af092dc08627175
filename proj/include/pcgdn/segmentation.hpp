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
#include <vector>

#include "pcgdn/audio.hpp"
#include "pcgdn/common.hpp"
#include "pcgdn/resample.hpp"

namespace pcgdn {

struct SegmentationParams {
  double segment_len_s = 1.5;
  double hop_s = 0.08;
  int target_rate_hz = 2000;

  void validate() const {
    if (!(hop_s > 0.0) || !(hop_s <= segment_len_s))
      throw ConfigError(str_cat("segmentation: require 0 < hop_s <= segment_len_s (hop ", hop_s, ", segment ",
                                segment_len_s, ")"));
    if (target_rate_hz <= 0) throw ConfigError("segmentation: target_rate_hz must be positive");
  }

  std::size_t window_samples() const {
    return static_cast<std::size_t>(std::llround(segment_len_s * target_rate_hz));
  }
};

// Number of full windows over a recording of `n_samples` at the target rate:
// floor((duration - segment_len) / hop) + 1, or 0 when the recording is short.
inline std::size_t window_count(std::size_t n_samples, const SegmentationParams& p) {
  const std::size_t win = p.window_samples();
  if (n_samples < win || win == 0) return 0;
  const double hop_samples = p.hop_s * p.target_rate_hz;
  const double span = static_cast<double>(n_samples - win) / hop_samples;
  return static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
}

// First sample of window k.
inline std::size_t window_start(std::size_t k, const SegmentationParams& p) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(k) * p.hop_s * p.target_rate_hz));
}

// Slides a fixed window over the recording (resampled to the target rate
// first). Trailing partial windows are dropped; a recording shorter than
// one window yields no segments and a warning.
inline std::vector<AudioSegment> segment(const AudioSegment& recording, const SegmentationParams& p,
                                         Diagnostics* diag = nullptr) {
  p.validate();
  validate(recording);
  const AudioSegment rs =
      recording.sample_rate_hz == p.target_rate_hz ? recording : resample(recording, p.target_rate_hz);
  const std::size_t count = window_count(rs.size(), p);
  std::vector<AudioSegment> out;
  if (count == 0) {
    if (diag)
      diag->warn(str_cat("recording '", recording.source_id, "' (", recording.duration_s(),
                         " s) is shorter than one ", p.segment_len_s, " s window; skipped"));
    return out;
  }
  const std::size_t win = p.window_samples();
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t start = window_start(k, p);
    AudioSegment s;
    s.sample_rate_hz = p.target_rate_hz;
    s.source_id = recording.source_id;
    s.offset_s = recording.offset_s + static_cast<double>(start) / p.target_rate_hz;
    s.label = recording.label;
    s.samples.assign(rs.samples.begin() + static_cast<std::ptrdiff_t>(start),
                     rs.samples.begin() + static_cast<std::ptrdiff_t>(start + win));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace pcgdn
