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
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pcgdn/audio.hpp"
#include "pcgdn/common.hpp"
#include "pcgdn/data/dataset.hpp"
#include "pcgdn/data/manifest.hpp"
#include "pcgdn/resample.hpp"
#include "pcgdn/wav.hpp"

// Segment cache: one file per prepared recording (decoded, resampled,
// peak-normalized), keyed by source checksum and rate. Layout:
//   8 bytes "PCGDNSEG", u32 version, u32 rate, u64 length, 8 bytes checksum
//   text, then `length` float64 samples.
namespace pcgdn::data {

inline constexpr char kCacheMagic[8] = {'P', 'C', 'G', 'D', 'N', 'S', 'E', 'G'};
inline constexpr std::uint32_t kCacheVersion = 1;

struct CacheEntry {
  int sample_rate_hz = 0;
  std::string checksum;
  std::vector<double> samples;
};

inline std::filesystem::path cache_path(const std::filesystem::path& dir, const std::string& checksum, int rate) {
  return dir / str_cat(checksum, "_", rate, ".seg");
}

inline void write_cache_entry(const std::filesystem::path& path, const CacheEntry& e) {
  if (e.checksum.size() != 8) throw DataError("cache entry checksum must be 8 hex digits");
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write cache entry '" + path.string() + "'");
    const std::uint32_t version = kCacheVersion;
    const auto rate = static_cast<std::uint32_t>(e.sample_rate_hz);
    const auto len = static_cast<std::uint64_t>(e.samples.size());
    out.write(kCacheMagic, 8);
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&rate), 4);
    out.write(reinterpret_cast<const char*>(&len), 8);
    out.write(e.checksum.data(), 8);
    out.write(reinterpret_cast<const char*>(e.samples.data()), static_cast<std::streamsize>(len * sizeof(double)));
    if (!out) throw DataError("failed writing cache entry '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

// Returns nothing for a missing, truncated or foreign file.
inline std::optional<CacheEntry> read_cache_entry(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  std::uint32_t version = 0, rate = 0;
  std::uint64_t len = 0;
  char checksum[8];
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&rate), 4);
  in.read(reinterpret_cast<char*>(&len), 8);
  in.read(checksum, 8);
  if (!in || std::memcmp(magic, kCacheMagic, 8) != 0 || version != kCacheVersion || len > (std::uint64_t{1} << 32))
    return std::nullopt;
  CacheEntry e;
  e.sample_rate_hz = static_cast<int>(rate);
  e.checksum.assign(checksum, 8);
  e.samples.resize(len);
  in.read(reinterpret_cast<char*>(e.samples.data()), static_cast<std::streamsize>(len * sizeof(double)));
  if (!in || in.peek() != std::char_traits<char>::eof()) return std::nullopt;
  return e;
}

// Loads manifest segments. Each source file is checksummed against the
// manifest before use; prepared recordings are memoized and, when a cache
// directory is set, persisted there.
class SegmentLoader {
 public:
  SegmentLoader(std::filesystem::path root, int rate_hz, std::optional<std::filesystem::path> cache_dir = {})
      : root_(std::move(root)), rate_(rate_hz), cache_dir_(std::move(cache_dir)) {
    if (cache_dir_) std::filesystem::create_directories(*cache_dir_);
  }

  std::size_t cache_hits() const { return hits_; }
  std::size_t cache_writes() const { return writes_; }

  // Decoded, resampled, peak-normalized recording for `e`.
  const std::vector<double>& recording(const ManifestEntry& e) {
    if (auto it = memo_.find(e.path); it != memo_.end()) return it->second;
    const auto bytes = wav::read_bytes(root_ / e.path);
    const auto actual = crc32_hex(bytes);
    if (actual != e.checksum)
      throw DataError("integrity error: '" + e.path + "' has checksum " + actual + ", manifest says " + e.checksum);
    if (cache_dir_) {
      const auto cp = cache_path(*cache_dir_, e.checksum, rate_);
      if (auto hit = read_cache_entry(cp); hit && hit->checksum == e.checksum && hit->sample_rate_hz == rate_) {
        ++hits_;
        return memo_.emplace(e.path, std::move(hit->samples)).first->second;
      }
    }
    AudioSegment rec = wav::decode(bytes, e.source_id);
    if (rec.sample_rate_hz != rate_) rec = resample(rec, rate_);
    rec = normalize(std::move(rec));
    if (cache_dir_) {
      write_cache_entry(cache_path(*cache_dir_, e.checksum, rate_), {rate_, e.checksum, rec.samples});
      ++writes_;
    }
    return memo_.emplace(e.path, std::move(rec.samples)).first->second;
  }

  AudioSegment load(const ManifestEntry& e) {
    const auto& rec = recording(e);
    const auto start = static_cast<std::size_t>(std::llround(e.offset_s * rate_));
    const auto n = static_cast<std::size_t>(std::llround(e.duration_s * rate_));
    if (start + n > rec.size())
      throw DataError(str_cat("segment at ", e.offset_s, " s of '", e.path, "' runs past the end of the recording"));
    AudioSegment s;
    s.samples.assign(rec.begin() + static_cast<std::ptrdiff_t>(start), rec.begin() + static_cast<std::ptrdiff_t>(start + n));
    s.sample_rate_hz = rate_;
    s.source_id = e.source_id;
    s.offset_s = e.offset_s;
    s.label = e.label;
    return s;
  }

  std::vector<AudioSegment> load_all(const std::vector<ManifestEntry>& entries) {
    std::vector<AudioSegment> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(load(e));
    return out;
  }

 private:
  std::filesystem::path root_;
  int rate_;
  std::optional<std::filesystem::path> cache_dir_;
  std::map<std::string, std::vector<double>> memo_;
  std::size_t hits_ = 0, writes_ = 0;
};

inline AudioSegment load_segment(const ManifestEntry& e, const std::filesystem::path& root, int rate_hz,
                                 const std::optional<std::filesystem::path>& cache_dir = {}) {
  SegmentLoader loader(root, rate_hz, cache_dir);
  return loader.load(e);
}

}  // namespace pcgdn::data
