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
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pcgdn/audio.hpp"
#include "pcgdn/common.hpp"
#include "pcgdn/noise.hpp"

namespace pcgdn {

struct TimeMaskPolicy {
  double max_fraction = 0.1;  // longest single masked run, fraction of the segment
  int count = 1;
  double probability = 0.3;
};

struct GainTransitionPolicy {
  double min_db = -6.0;
  double max_db = 6.0;
  double min_duration_s = 0.1;
  double probability = 0.3;
};

// Additive noise burst ("randomly sustained noise"): kind drawn uniformly
// from `kinds`, SNR uniform in [snr_low_db, snr_high_db], burst length a
// uniform fraction of the segment in [min_burst_fraction, max_burst_fraction].
struct SustainedNoisePolicy {
  std::vector<std::string> kinds = {"white", "pink", "red", "hospital"};
  double snr_low_db = 0.0;
  double snr_high_db = 10.0;
  double min_burst_fraction = 0.3;
  double max_burst_fraction = 1.0;
  double probability = 1.0;
};

struct AugmentPolicy {
  TimeMaskPolicy time_mask;
  GainTransitionPolicy gain_transition;
  SustainedNoisePolicy sustained_noise;
  std::uint64_t seed = 0;

  void validate() const {
    auto prob = [](double p, const char* what) {
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(str_cat("augment: ", what, " probability must lie in [0,1]"));
    };
    prob(time_mask.probability, "time_mask");
    prob(gain_transition.probability, "gain_transition");
    prob(sustained_noise.probability, "sustained_noise");
    if (!(time_mask.max_fraction > 0.0 && time_mask.max_fraction < 1.0))
      throw ConfigError("augment: time_mask.max_fraction must lie in (0,1)");
    if (time_mask.count < 0) throw ConfigError("augment: time_mask.count must be >= 0");
    if (time_mask.count * time_mask.max_fraction > 0.5 + 1e-12)
      throw ConfigError("augment: total masked fraction (count * max_fraction) must not exceed 0.5");
    if (gain_transition.min_db > gain_transition.max_db)
      throw ConfigError("augment: gain_transition.min_db must not exceed max_db");
    if (gain_transition.min_duration_s < 0.0) throw ConfigError("augment: gain_transition.min_duration_s < 0");
    const auto& sn = sustained_noise;
    if (sn.snr_low_db > sn.snr_high_db) throw ConfigError("augment: snr range low must not exceed high");
    if (!(sn.min_burst_fraction > 0.0 && sn.min_burst_fraction <= sn.max_burst_fraction &&
          sn.max_burst_fraction <= 1.0))
      throw ConfigError("augment: burst fractions must satisfy 0 < min <= max <= 1");
    if (sn.probability > 0.0 && sn.kinds.empty())
      throw ConfigError("augment: sustained noise enabled with no noise kinds");
  }
};

// Zeroes `count` contiguous runs, each at most max_fraction of the segment.
inline AudioSegment time_mask(AudioSegment seg, const TimeMaskPolicy& policy, Rng& rng) {
  const auto n = static_cast<std::int64_t>(seg.size());
  const auto longest = static_cast<std::int64_t>(std::floor(policy.max_fraction * static_cast<double>(n)));
  if (policy.count <= 0 || longest < 1) return seg;
  for (int c = 0; c < policy.count; ++c) {
    const std::int64_t len = rng.uniform_int(1, longest);
    const std::int64_t start = rng.uniform_int(0, n - len);
    std::fill_n(seg.samples.begin() + start, len, 0.0);
  }
  return seg;
}

// Gain profile in dB: g1 before the window, a linear-in-dB ramp to g2
// across it, g2 after. Both gains and the window are seeded.
inline AudioSegment gain_transition(AudioSegment seg, const GainTransitionPolicy& policy, Rng& rng) {
  if (policy.min_db > policy.max_db) throw ConfigError("gain_transition: min_db > max_db");
  const auto n = static_cast<std::int64_t>(seg.size());
  const double g1 = rng.uniform(policy.min_db, policy.max_db);
  const double g2 = rng.uniform(policy.min_db, policy.max_db);
  const auto min_len = std::clamp<std::int64_t>(
      static_cast<std::int64_t>(std::ceil(policy.min_duration_s * seg.sample_rate_hz)), 1, n);
  const std::int64_t len = rng.uniform_int(min_len, n);
  const std::int64_t start = rng.uniform_int(0, n - len);
  for (std::int64_t i = 0; i < n; ++i) {
    double db;
    if (i < start) db = g1;
    else if (i >= start + len) db = g2;
    else db = g1 + (g2 - g1) * static_cast<double>(i - start) / static_cast<double>(std::max<std::int64_t>(len - 1, 1));
    seg.samples[static_cast<std::size_t>(i)] *= std::pow(10.0, db / 20.0);
  }
  return seg;
}

// Additive noise burst scaled so that snr_db(seg, result) hits the sampled
// SNR exactly (noise energy is measured over the whole segment).
inline AudioSegment sustained_noise(const AudioSegment& seg, const SustainedNoisePolicy& policy,
                                    const NoiseBank* bank, Rng& rng) {
  const auto& label = policy.kinds[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(policy.kinds.size()) - 1))];
  const double snr = rng.uniform(policy.snr_low_db, policy.snr_high_db);
  const double frac = rng.uniform(policy.min_burst_fraction, policy.max_burst_fraction);
  const auto n = static_cast<std::int64_t>(seg.size());
  const std::int64_t len = std::clamp<std::int64_t>(std::llround(frac * static_cast<double>(n)), 1, n);
  const std::int64_t start = rng.uniform_int(0, n - len);
  const std::uint64_t noise_seed = static_cast<std::uint64_t>(rng.engine()());

  const NoiseSpec spec = noise_spec_from_label(label, snr, noise_seed);
  const auto burst = realize_noise(spec, static_cast<std::size_t>(len), seg.sample_rate_hz, bank);
  AudioSegment noise;
  noise.sample_rate_hz = seg.sample_rate_hz;
  noise.samples.assign(seg.size(), 0.0);
  std::copy(burst.begin(), burst.end(), noise.samples.begin() + start);
  return mix_at_snr(seg, noise, snr);
}

// One distorted view: additive noise, then gain transition, then masking.
inline AudioSegment make_view(const AudioSegment& seg, const AugmentPolicy& policy, const NoiseBank* bank,
                              std::uint64_t view_seed) {
  Rng rng(view_seed);
  AudioSegment v = seg;
  // Gate draws are taken unconditionally so each op's stream is stable.
  const bool do_noise = rng.bernoulli(policy.sustained_noise.probability);
  const bool do_gain = rng.bernoulli(policy.gain_transition.probability);
  const bool do_mask = rng.bernoulli(policy.time_mask.probability);
  Rng noise_rng(derive_seed(view_seed, {1}));
  Rng gain_rng(derive_seed(view_seed, {2}));
  Rng mask_rng(derive_seed(view_seed, {3}));
  if (do_noise) v = sustained_noise(v, policy.sustained_noise, bank, noise_rng);
  if (do_gain) v = gain_transition(std::move(v), policy.gain_transition, gain_rng);
  if (do_mask) v = time_mask(std::move(v), policy.time_mask, mask_rng);
  return v;
}

// k independently seeded distorted versions of `seg`. `stream_seed` names
// the sample's substream; it is combined with the policy seed.
inline std::vector<AudioSegment> make_views(const AudioSegment& seg, const AugmentPolicy& policy,
                                            const NoiseBank* bank, int k, std::uint64_t stream_seed = 0) {
  if (k < 1) throw ConfigError(str_cat("make_views: view count must be >= 1, got ", k));
  policy.validate();
  std::vector<AudioSegment> views;
  views.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j)
    views.push_back(make_view(seg, policy, bank, derive_seed(policy.seed, {stream_seed, static_cast<std::uint64_t>(j)})));
  return views;
}

}  // namespace pcgdn
