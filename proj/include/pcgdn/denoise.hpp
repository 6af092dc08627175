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
#include <span>
#include <vector>

#include "pcgdn/audio.hpp"
#include "pcgdn/common.hpp"
#include "pcgdn/model.hpp"
#include "pcgdn/resample.hpp"

namespace pcgdn {

// Triangular taper; two copies offset by half the length sum to one.
inline std::vector<double> triangular_window(std::size_t len) {
  std::vector<double> w(len);
  for (std::size_t i = 0; i < len; ++i)
    w[i] = 1.0 - std::abs((2.0 * static_cast<double>(i) + 1.0 - static_cast<double>(len)) / static_cast<double>(len));
  return w;
}

// Denoises a signal of any length with the model's fixed input length:
// frames overlap by 50% and are cross-faded with a triangular window. The
// signal is padded by half a frame at both ends so every sample is covered
// by two frames. Input is peak-normalized for the model and the output is
// scaled back, so the result has the input's length and level.
inline std::vector<double> denoise_signal(const ModelState& state, std::span<const double> x) {
  if (x.empty()) return {};
  if (!all_finite(x)) throw DataError("denoise: non-finite input samples");
  const double scale = peak(x);
  if (scale == 0.0) return std::vector<double>(x.size(), 0.0);
  std::vector<double> xs(x.begin(), x.end());
  for (auto& v : xs) v /= scale;

  const auto len = static_cast<std::size_t>(state.config.input_len);
  std::vector<double> out;
  if (xs.size() <= len) {
    out = denoise_segment(state, xs);
  } else {
    const std::size_t hop = len / 2;
    const std::size_t frames = (xs.size() + 2 * hop - len + hop - 1) / hop + 1;
    const std::size_t padded_len = (frames - 1) * hop + len;
    std::vector<double> padded(padded_len, 0.0);
    std::copy(xs.begin(), xs.end(), padded.begin() + static_cast<std::ptrdiff_t>(hop));

    nn::Mat batch(static_cast<nn::Index>(frames), static_cast<nn::Index>(len));
    for (std::size_t f = 0; f < frames; ++f)
      for (std::size_t i = 0; i < len; ++i) batch(static_cast<nn::Index>(f), static_cast<nn::Index>(i)) = padded[f * hop + i];
    const nn::Mat y = forward(state, batch).denoised;

    const auto w = triangular_window(len);
    std::vector<double> acc(padded_len, 0.0), wsum(padded_len, 0.0);
    for (std::size_t f = 0; f < frames; ++f)
      for (std::size_t i = 0; i < len; ++i) {
        acc[f * hop + i] += w[i] * y(static_cast<nn::Index>(f), static_cast<nn::Index>(i));
        wsum[f * hop + i] += w[i];
      }
    out.resize(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = acc[hop + i] / wsum[hop + i];
  }
  for (auto& v : out) v *= scale;
  return out;
}

// Whole-recording denoising at `model_rate_hz`. Other rates are resampled in
// and back out (with a warning), and the result keeps the input's length.
inline AudioSegment denoise_recording(const ModelState& state, const AudioSegment& in, int model_rate_hz,
                                      Diagnostics* diag = nullptr) {
  validate(in);
  AudioSegment out = in;
  if (in.sample_rate_hz == model_rate_hz) {
    out.samples = denoise_signal(state, in.samples);
    return out;
  }
  if (diag)
    diag->warn(str_cat("input '", in.source_id, "' is ", in.sample_rate_hz, " Hz; resampling to ", model_rate_hz,
                       " Hz for the model and back"));
  const auto down = resample(in, model_rate_hz);
  AudioSegment den = down;
  den.samples = denoise_signal(state, down.samples);
  auto back = resample(den, in.sample_rate_hz);
  back.samples.resize(in.size(), 0.0);
  out.samples = std::move(back.samples);
  return out;
}

}  // namespace pcgdn
