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
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "pcgdn/audio.hpp"
#include "pcgdn/common.hpp"
#include "pcgdn/noise.hpp"
#include "pcgdn/synthetic.hpp"

namespace fixture {

namespace fs = std::filesystem;

// Standalone 16-bit PCM mono writer so WAV decoding is checked against
// bytes the library did not produce.
inline void write_pcm16(const fs::path& path, const std::vector<double>& x, int rate) {
  auto put = [](std::ofstream& o, std::uint32_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) o.put(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  fs::create_directories(path.parent_path());
  std::ofstream o(path, std::ios::binary);
  const auto data_bytes = static_cast<std::uint32_t>(x.size() * 2);
  o.write("RIFF", 4);
  put(o, 36 + data_bytes, 4);
  o.write("WAVEfmt ", 8);
  put(o, 16, 4);
  put(o, 1, 2);
  put(o, 1, 2);
  put(o, static_cast<std::uint32_t>(rate), 4);
  put(o, static_cast<std::uint32_t>(rate * 2), 4);
  put(o, 2, 2);
  put(o, 16, 2);
  o.write("data", 4);
  put(o, data_bytes, 4);
  for (double v : x) {
    const auto s = static_cast<std::int16_t>(std::lround(std::clamp(v, -1.0, 1.0) * 32767.0));
    put(o, static_cast<std::uint16_t>(s), 2);
  }
}

inline std::vector<std::uint8_t> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Fresh empty directory under the system temp dir.
inline fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("pcgdn_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// <root>/<CLASS>/<CLASS>_NNN.wav with synthetic PCG recordings at `rate`.
// durations_s cycles over the files of each class.
inline void write_yaseen_layout(const fs::path& root, int per_class, const std::vector<double>& durations_s,
                                int rate = 8000, std::uint64_t seed = 1) {
  for (auto c : pcgdn::kAllClasses)
    for (int i = 0; i < per_class; ++i) {
      pcgdn::synth::PcgOptions o;
      o.sample_rate_hz = rate;
      o.duration_s = durations_s[static_cast<std::size_t>(i) % durations_s.size()];
      const auto seg = pcgdn::synth::pcg(c, pcgdn::derive_seed(seed, {static_cast<std::uint64_t>(c), std::uint64_t(i)}), o);
      char name[32];
      std::snprintf(name, sizeof name, "%s_%03d.wav", std::string(pcgdn::to_string(c)).c_str(), i);
      write_pcm16(root / std::string(pcgdn::to_string(c)) / name, pcgdn::normalize(seg).samples, rate);
    }
}

// Stand-in for a real-recording bank: band-limited noise with a slow
// amplitude modulation and a few tonal components.
inline pcgdn::AudioSegment ambient_noise(std::uint64_t seed, std::size_t n, int rate, double tone_hz) {
  pcgdn::Rng rng(seed);
  pcgdn::AudioSegment s;
  s.sample_rate_hz = rate;
  s.samples.resize(n);
  double lp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lp = 0.9 * lp + 0.1 * rng.normal();
    const double t = static_cast<double>(i) / rate;
    s.samples[i] = (1.0 + 0.5 * std::sin(2 * 3.14159265358979 * 0.7 * t)) * lp +
                   0.2 * std::sin(2 * 3.14159265358979 * tone_hz * t);
  }
  return pcgdn::normalize(s);
}

inline pcgdn::NoiseBank ambient_bank(int rate, const std::vector<std::string>& labels = {"hospital", "lung"}) {
  pcgdn::NoiseBank bank;
  bank.sample_rate_hz = rate;
  std::uint64_t k = 0;
  for (const auto& l : labels) {
    for (int i = 0; i < 3; ++i, ++k)
      bank.banks[l].push_back(ambient_noise(900 + k, static_cast<std::size_t>(4 * rate), rate, 50.0 + 40.0 * k));
  }
  return bank;
}

inline void write_ambient_bank(const fs::path& root, int rate, const std::vector<std::string>& labels = {"hospital", "lung"}) {
  const auto bank = ambient_bank(rate, labels);
  for (const auto& [label, recs] : bank.banks)
    for (std::size_t i = 0; i < recs.size(); ++i)
      write_pcm16(root / label / (label + "_" + std::to_string(i) + ".wav"), recs[i].samples, rate);
}

}  // namespace fixture
