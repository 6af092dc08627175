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
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/crc.hpp>

#include "pcgdn/audio.hpp"
#include "pcgdn/common.hpp"
#include "pcgdn/wav.hpp"

namespace pcgdn::data {

// <root>/<CLASS>/*.wav for the five classes.
struct DatasetSpec {
  std::filesystem::path root;
  std::optional<std::size_t> expected_per_class = 200;
};

struct RecordingInfo {
  std::string path;  // relative to the dataset root, '/' separated
  PcgClass label = PcgClass::N;
  std::string checksum;  // CRC-32 of the file bytes, 8 hex digits
  int sample_rate_hz = 0;
  std::size_t frames = 0;

  // "<CLASS>/<file stem>"; unique within a dataset.
  std::string source_id() const { return path.substr(0, path.size() - std::filesystem::path(path).extension().string().size()); }
};

struct Inventory {
  std::filesystem::path root;
  std::vector<RecordingInfo> recordings;  // sorted by class, then path
  std::array<std::size_t, kNumClasses> counts{};
};

inline std::string crc32_hex(const std::vector<std::uint8_t>& bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(crc.checksum()));
  return buf;
}

inline bool has_wav_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".wav";
}

// Lists, checksums and probes every recording. Count mismatches against the
// expected per-class count and identical files under different classes are
// reported as warnings.
inline Inventory scan(const DatasetSpec& spec, Diagnostics* diag = nullptr) {
  namespace fs = std::filesystem;
  if (spec.root.empty() || !fs::is_directory(spec.root))
    throw ConfigError("dataset root '" + spec.root.string() + "' does not exist or is not a directory");
  Inventory inv;
  inv.root = spec.root;
  std::map<std::string, std::string> seen;  // checksum -> path
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const std::string cls(to_string(kAllClasses[c]));
    const fs::path dir = spec.root / cls;
    if (!fs::is_directory(dir)) throw DataError("dataset is missing class directory '" + cls + "' under " + spec.root.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && has_wav_extension(e.path())) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("class directory '" + cls + "' contains no .wav files");
    for (const auto& f : files) {
      const auto bytes = wav::read_bytes(f);
      RecordingInfo r;
      r.path = cls + "/" + f.filename().string();
      r.label = kAllClasses[c];
      r.checksum = crc32_hex(bytes);
      const auto info = wav::probe(bytes, f.string());
      r.sample_rate_hz = info.sample_rate_hz;
      r.frames = info.frames;
      if (auto it = seen.find(r.checksum); it != seen.end()) {
        if (diag) diag->warn("possible leakage: '" + r.path + "' has the same checksum as '" + it->second + "'");
      } else {
        seen.emplace(r.checksum, r.path);
      }
      inv.recordings.push_back(std::move(r));
    }
    inv.counts[c] = files.size();
    if (spec.expected_per_class && files.size() != *spec.expected_per_class && diag)
      diag->warn(str_cat("class ", cls, " has ", files.size(), " recordings, expected ", *spec.expected_per_class));
  }
  return inv;
}

}  // namespace pcgdn::data
