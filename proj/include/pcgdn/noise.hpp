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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcgdn/audio.hpp"
#include "pcgdn/common.hpp"
#include "pcgdn/resample.hpp"
#include "pcgdn/spectral.hpp"
#include "pcgdn/wav.hpp"

namespace pcgdn {

enum class NoiseKind { White, Pink, Red, File };

inline std::string_view to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::White: return "white";
    case NoiseKind::Pink: return "pink";
    case NoiseKind::Red: return "red";
    case NoiseKind::File: return "file";
  }
  return "?";
}

// Declarative noise injection. For kind == File, file_ref names a noise-bank
// label (e.g. "hospital") and the recording is chosen by seed.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::White;
  double target_snr_db = 10.0;
  std::uint64_t seed = 0;
  std::optional<std::string> file_ref;

  void validate() const {
    if (kind == NoiseKind::File && (!file_ref || file_ref->empty()))
      throw ConfigError("noise spec of kind 'file' requires a file_ref");
    if (!std::isfinite(target_snr_db)) throw ConfigError("noise spec target SNR must be finite");
  }

  // "white", "pink", "red", or the bank label for file noise.
  std::string label() const { return kind == NoiseKind::File ? *file_ref : std::string(to_string(kind)); }
};

// Maps a grid/policy label to a spec: synthetic colours by name, anything
// else is a noise-bank label.
inline NoiseSpec noise_spec_from_label(const std::string& label, double snr_db, std::uint64_t seed) {
  NoiseSpec s;
  s.target_snr_db = snr_db;
  s.seed = seed;
  if (label == "white") s.kind = NoiseKind::White;
  else if (label == "pink") s.kind = NoiseKind::Pink;
  else if (label == "red") s.kind = NoiseKind::Red;
  else {
    s.kind = NoiseKind::File;
    s.file_ref = label;
  }
  return s;
}

// Seeded zero-mean unit-variance noise with a power-law spectrum: white is
// flat, pink is 1/f, red is 1/f^2. Pink and red shape the spectrum of seeded
// white noise with 1/sqrt(f) and 1/f amplitude masks (DC removed).
inline AudioSegment gen_colored(NoiseKind kind, std::size_t n, int rate_hz, std::uint64_t seed) {
  if (n == 0) throw ConfigError("gen_colored: sample count must be positive");
  if (rate_hz <= 0) throw ConfigError("gen_colored: sample rate must be positive");
  if (kind == NoiseKind::File) throw ConfigError("gen_colored: 'file' is not a synthetic noise kind");

  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();

  if (kind != NoiseKind::White && n > 1) {
    auto spec = fft(x);
    const double exponent = kind == NoiseKind::Pink ? 0.5 : 1.0;
    spec[0] = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      const double bin = static_cast<double>(std::min(k, n - k));
      spec[k] *= std::pow(bin, -exponent);
    }
    x = ifft_real(spec);
  }

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  for (double& v : x) v -= mean;
  const double r = rms(x);
  if (r > 0.0)
    for (double& v : x) v /= r;

  AudioSegment out;
  out.samples = std::move(x);
  out.sample_rate_hz = rate_hz;
  out.source_id = str_cat(to_string(kind), "-noise-", seed);
  return out;
}

// Brings a noise recording to exactly n samples: longer noise is cropped at
// a seeded offset, shorter noise is tiled starting from a seeded offset.
inline std::vector<double> fit_noise_length(std::span<const double> noise, std::size_t n, std::uint64_t seed) {
  if (noise.empty()) throw DataError("noise source is empty");
  Rng rng(seed);
  std::vector<double> out(n);
  if (noise.size() >= n) {
    const auto off = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(noise.size() - n)));
    std::copy_n(noise.begin() + static_cast<std::ptrdiff_t>(off), n, out.begin());
  } else {
    const auto off = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(noise.size()) - 1));
    for (std::size_t i = 0; i < n; ++i) out[i] = noise[(off + i) % noise.size()];
  }
  return out;
}

// Scale factor that puts `noise` at `target_snr_db` below `signal`.
inline double snr_scale(std::span<const double> signal, std::span<const double> noise, double target_snr_db) {
  const double ps = energy(signal);
  const double pn = energy(noise);
  if (ps == 0.0) throw DataError("mix_at_snr: signal is all-zero");
  if (pn == 0.0) throw DataError("mix_at_snr: noise is all-zero");
  return std::sqrt((ps / pn) * std::pow(10.0, -target_snr_db / 10.0));
}

// signal + alpha * noise with alpha chosen so snr_db(signal, result) equals
// the target. Noise of a different length is cropped or tiled (seeded).
inline AudioSegment mix_at_snr(const AudioSegment& signal, const AudioSegment& noise, double target_snr_db,
                               std::uint64_t length_seed = 0) {
  validate(signal);
  if (noise.samples.empty()) throw DataError("mix_at_snr: noise is empty");
  std::vector<double> n = noise.size() == signal.size()
                              ? noise.samples
                              : fit_noise_length(noise.samples, signal.size(), length_seed);
  const double alpha = snr_scale(signal.samples, n, target_snr_db);
  AudioSegment out = signal;
  for (std::size_t i = 0; i < n.size(); ++i) out.samples[i] += alpha * n[i];
  return out;
}

// Real noise recordings, keyed by bank label. Immutable after loading.
struct NoiseBank {
  std::map<std::string, std::vector<AudioSegment>> banks;
  int sample_rate_hz = 0;

  bool has(const std::string& label) const {
    auto it = banks.find(label);
    return it != banks.end() && !it->second.empty();
  }
};

// Loads <root>/<kind_label>/*.wav, resampled to `target_rate_hz`. Corrupt
// files are skipped and recorded in `skips`.
inline std::vector<AudioSegment> load_noise_bank(const std::filesystem::path& root, const std::string& kind_label,
                                                 int target_rate_hz, Diagnostics* skips = nullptr) {
  namespace fs = std::filesystem;
  const fs::path dir = root / kind_label;
  if (!fs::is_directory(dir)) throw DataError("noise bank directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (e.is_regular_file() && ext == ".wav") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no noise files found in " + dir.string());

  std::vector<AudioSegment> out;
  for (const auto& f : files) {
    try {
      AudioSegment seg = wav::read(f, kind_label + "/" + f.filename().string());
      if (energy(seg.samples) == 0.0) throw DataError("silent noise file");
      seg = resample(seg, target_rate_hz);
      out.push_back(std::move(seg));
    } catch (const Error& e) {
      if (skips) skips->warn(str_cat("skipped noise file ", f.string(), ": ", e.what()));
    }
  }
  if (out.empty()) throw DataError("no readable noise files in " + dir.string());
  return out;
}

// Produces n samples of raw (unscaled) noise for `spec`.
inline std::vector<double> realize_noise(const NoiseSpec& spec, std::size_t n, int rate_hz,
                                         const NoiseBank* bank = nullptr) {
  spec.validate();
  if (spec.kind != NoiseKind::File) return gen_colored(spec.kind, n, rate_hz, spec.seed).samples;
  if (!bank || !bank->has(*spec.file_ref))
    throw DataError("noise bank has no recordings labelled '" + *spec.file_ref + "'");
  if (bank->sample_rate_hz != rate_hz)
    throw DataError(str_cat("noise bank rate ", bank->sample_rate_hz, " Hz differs from ", rate_hz, " Hz"));
  const auto& recs = bank->banks.at(*spec.file_ref);
  Rng rng(derive_seed(spec.seed, {1}));
  const auto& rec = recs[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(recs.size()) - 1))];
  return fit_noise_length(rec.samples, n, derive_seed(spec.seed, {2}));
}

// Applies a full noise spec to a clean or noisy signal.
inline AudioSegment apply_noise(const AudioSegment& signal, const NoiseSpec& spec, const NoiseBank* bank = nullptr) {
  AudioSegment noise;
  noise.samples = realize_noise(spec, signal.size(), signal.sample_rate_hz, bank);
  noise.sample_rate_hz = signal.sample_rate_hz;
  return mix_at_snr(signal, noise, spec.target_snr_db);
}

}  // namespace pcgdn
