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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcgdn/audio.hpp"
#include "pcgdn/common.hpp"
#include "pcgdn/data/dataset.hpp"
#include "pcgdn/resample.hpp"
#include "pcgdn/segmentation.hpp"
#include "pcgdn/split.hpp"

namespace pcgdn::data {

inline constexpr int kManifestVersion = 1;

struct ManifestEntry {
  std::string source_id;
  std::string path;
  PcgClass label = PcgClass::N;
  double offset_s = 0.0;
  double duration_s = 0.0;
  Split split = Split::Train;
  std::string checksum;

  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  SegmentationParams segmentation;
  SplitRatios ratios;
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> entries;

  std::vector<ManifestEntry> in_split(Split s) const {
    std::vector<ManifestEntry> out;
    for (const auto& e : entries)
      if (e.split == s) out.push_back(e);
    return out;
  }
};

// Assigns whole recordings to splits (stratified by class, seeded) and
// expands each recording into its sliding-window segments.
inline Manifest build_manifest(const Inventory& inv, const SegmentationParams& seg, const SplitRatios& ratios,
                               std::uint64_t seed, Diagnostics* diag = nullptr) {
  seg.validate();
  ratios.validate();
  Manifest m;
  m.segmentation = seg;
  m.ratios = ratios;
  m.seed = seed;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::vector<const RecordingInfo*> recs;
    for (const auto& r : inv.recordings)
      if (r.label == kAllClasses[c]) recs.push_back(&r);
    const auto splits = assign_splits(recs.size(), ratios, derive_seed(seed, {0x5917, c}));
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const auto& r = *recs[i];
      const std::size_t n = resampled_length(r.frames, r.sample_rate_hz, seg.target_rate_hz);
      const std::size_t count = window_count(n, seg);
      if (count == 0 && diag)
        diag->warn(str_cat("recording '", r.path, "' is shorter than one ", seg.segment_len_s, " s window; skipped"));
      for (std::size_t k = 0; k < count; ++k) {
        ManifestEntry e;
        e.source_id = r.source_id();
        e.path = r.path;
        e.label = r.label;
        e.offset_s = static_cast<double>(window_start(k, seg)) / seg.target_rate_hz;
        e.duration_s = seg.segment_len_s;
        e.split = splits[i];
        e.checksum = r.checksum;
        m.entries.push_back(std::move(e));
      }
    }
  }
  return m;
}

// JSON lines: a header object, then one object per segment.
inline std::string serialize(const Manifest& m) {
  std::ostringstream out;
  nlohmann::json header{{"format", "pcgdn-manifest"},
                        {"version", kManifestVersion},
                        {"segment_len_s", m.segmentation.segment_len_s},
                        {"hop_s", m.segmentation.hop_s},
                        {"sample_rate_hz", m.segmentation.target_rate_hz},
                        {"ratios", {m.ratios.train, m.ratios.val, m.ratios.test}},
                        {"seed", m.seed},
                        {"entries", m.entries.size()}};
  out << header.dump() << '\n';
  for (const auto& e : m.entries) {
    nlohmann::json j{{"source_id", e.source_id}, {"path", e.path},         {"label", to_string(e.label)},
                     {"offset_s", e.offset_s},   {"duration_s", e.duration_s}, {"split", to_string(e.split)},
                     {"checksum", e.checksum}};
    out << j.dump() << '\n';
  }
  return out.str();
}

inline Manifest parse_manifest(const std::string& text, const std::string& what = "manifest") {
  std::istringstream in(text);
  std::string line;
  Manifest m;
  try {
    if (!std::getline(in, line)) throw DataError(what + ": empty file");
    const auto h = nlohmann::json::parse(line);
    if (h.at("format").get<std::string>() != "pcgdn-manifest") throw DataError(what + ": not a manifest");
    if (h.at("version").get<int>() != kManifestVersion)
      throw DataError(str_cat(what, ": manifest version ", h.at("version").get<int>(), ", expected ", kManifestVersion));
    m.segmentation.segment_len_s = h.at("segment_len_s").get<double>();
    m.segmentation.hop_s = h.at("hop_s").get<double>();
    m.segmentation.target_rate_hz = h.at("sample_rate_hz").get<int>();
    const auto r = h.at("ratios");
    m.ratios = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
    m.seed = h.at("seed").get<std::uint64_t>();
    const auto expected = h.at("entries").get<std::size_t>();
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      ManifestEntry e;
      e.source_id = j.at("source_id").get<std::string>();
      e.path = j.at("path").get<std::string>();
      const auto label = parse_class(j.at("label").get<std::string>());
      if (!label) throw DataError(str_cat(what, ": unknown class label on line ", line_no));
      e.label = *label;
      e.offset_s = j.at("offset_s").get<double>();
      e.duration_s = j.at("duration_s").get<double>();
      e.split = parse_split(j.at("split").get<std::string>());
      e.checksum = j.at("checksum").get<std::string>();
      m.entries.push_back(std::move(e));
    }
    if (m.entries.size() != expected)
      throw DataError(str_cat(what, ": header announces ", expected, " entries, found ", m.entries.size()));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(what + ": malformed manifest: " + e.what());
  }
  return m;
}

inline void save(const Manifest& m, const std::filesystem::path& path) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write manifest '" + path.string() + "'");
    out << serialize(m);
  }
  std::filesystem::rename(tmp, path);
}

inline Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open manifest '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.string());
}

}  // namespace pcgdn::data
