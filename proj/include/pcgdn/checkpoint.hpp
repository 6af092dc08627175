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
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <boost/crc.hpp>
#include <nlohmann/json.hpp>

#include "pcgdn/common.hpp"
#include "pcgdn/model.hpp"
#include "pcgdn/nn/params.hpp"

// Checkpoint container, little-endian:
//   8 bytes  magic "PCGDNCKP"
//   u32      format version
//   u64      header length H
//   H bytes  JSON header {kind, metadata, tensors: [{name, rows, cols}]}
//   payload  every tensor's values as float64, column-major, in header order
//   u32      CRC-32 of all preceding bytes
namespace pcgdn::checkpoint {

inline constexpr char kMagic[8] = {'P', 'C', 'G', 'D', 'N', 'C', 'K', 'P'};
inline constexpr std::uint32_t kVersion = 1;

struct Container {
  std::string kind;            // "denoiser", "classifier", ...
  nlohmann::json metadata;     // config, seed, step and anything else
  std::vector<std::string> names;
  std::vector<nn::Mat> tensors;

  void add(const std::string& prefix, const nn::ParamStore& store) {
    for (std::size_t i = 0; i < store.size(); ++i) {
      names.push_back(prefix + store.names[i]);
      tensors.push_back(store.values[i]);
    }
  }

  // Extracts every tensor whose name starts with `prefix`, in order.
  nn::ParamStore extract(const std::string& prefix) const {
    nn::ParamStore s;
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i].rfind(prefix, 0) == 0) {
        s.names.push_back(names[i].substr(prefix.size()));
        s.values.push_back(tensors[i]);
      }
    return s;
  }
};

namespace detail {
template <typename T>
void put(std::vector<std::uint8_t>& out, const T& v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}
template <typename T>
T get(const std::vector<std::uint8_t>& in, std::size_t& pos, const std::string& path) {
  if (pos + sizeof(T) > in.size()) throw DataError("corrupt checkpoint '" + path + "': truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}
inline std::uint32_t crc32(const std::uint8_t* data, std::size_t n) {
  boost::crc_32_type crc;
  crc.process_bytes(data, n);
  return crc.checksum();
}
}  // namespace detail

inline std::vector<std::uint8_t> serialize(const Container& c) {
  nlohmann::json header;
  header["kind"] = c.kind;
  header["metadata"] = c.metadata;
  auto& tensors = header["tensors"] = nlohmann::json::array();
  for (std::size_t i = 0; i < c.names.size(); ++i)
    tensors.push_back({{"name", c.names[i]}, {"rows", c.tensors[i].rows()}, {"cols", c.tensors[i].cols()}});
  const std::string h = header.dump();

  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  detail::put(out, kVersion);
  detail::put(out, static_cast<std::uint64_t>(h.size()));
  out.insert(out.end(), h.begin(), h.end());
  for (const auto& t : c.tensors) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(t.data());
    out.insert(out.end(), p, p + t.size() * sizeof(double));
  }
  detail::put(out, detail::crc32(out.data(), out.size()));
  return out;
}

inline Container deserialize(const std::vector<std::uint8_t>& in, const std::string& path) {
  auto corrupt = [&](const std::string& why) { return DataError("corrupt checkpoint '" + path + "': " + why); };
  if (in.size() < sizeof(kMagic) + 4 + 8 + 4 || std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0)
    throw corrupt("bad magic or truncated header");
  std::size_t pos = sizeof(kMagic);
  const auto version = detail::get<std::uint32_t>(in, pos, path);
  if (version != kVersion)
    throw DataError(str_cat("checkpoint '", path, "' has format version ", version, ", expected ", kVersion));
  const auto hlen = detail::get<std::uint64_t>(in, pos, path);
  if (hlen > in.size() - pos) throw corrupt("truncated");
  const std::uint32_t stored_crc = [&] {
    std::uint32_t v;
    std::memcpy(&v, in.data() + in.size() - 4, 4);
    return v;
  }();

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(in.begin() + static_cast<std::ptrdiff_t>(pos),
                                   in.begin() + static_cast<std::ptrdiff_t>(pos + hlen));
  } catch (const nlohmann::json::exception&) {
    throw corrupt("unreadable header");
  }
  pos += hlen;

  Container c;
  try {
    c.kind = header.at("kind").get<std::string>();
    c.metadata = header.at("metadata");
    for (const auto& t : header.at("tensors")) {
      const auto rows = t.at("rows").get<nn::Index>();
      const auto cols = t.at("cols").get<nn::Index>();
      const auto bytes = static_cast<std::size_t>(rows * cols) * sizeof(double);
      if (rows < 0 || cols < 0 || pos + bytes + 4 > in.size()) throw corrupt("truncated tensor payload");
      nn::Mat m(rows, cols);
      std::memcpy(m.data(), in.data() + pos, bytes);
      pos += bytes;
      c.names.push_back(t.at("name").get<std::string>());
      c.tensors.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception&) {
    throw corrupt("malformed header");
  }
  if (pos + 4 != in.size()) throw corrupt("unexpected trailing bytes");
  if (detail::crc32(in.data(), pos) != stored_crc) throw corrupt("checksum mismatch");
  return c;
}

// Writes via a temporary file and rename so readers never see partial files.
inline void write_file(const std::filesystem::path& path, const Container& c) {
  const auto bytes = serialize(c);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing checkpoint '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline Container read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return deserialize(bytes, path.string());
}

}  // namespace pcgdn::checkpoint

namespace pcgdn {

inline checkpoint::Container to_container(const ModelState& s, const nlohmann::json& extra = nlohmann::json::object()) {
  checkpoint::Container c;
  c.kind = "denoiser";
  c.metadata = {{"config", s.config}, {"seed", s.seed}, {"step", s.step}, {"extra", extra}};
  c.add("model.", s.params);
  return c;
}

inline ModelState model_from_container(const checkpoint::Container& c) {
  if (c.kind != "denoiser") throw DataError("checkpoint holds a '" + c.kind + "', not a denoiser");
  ModelState s;
  try {
    s.config = c.metadata.at("config").get<ModelConfig>();
    s.seed = c.metadata.at("seed").get<std::uint64_t>();
    s.step = c.metadata.at("step").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("corrupt checkpoint metadata: ") + e.what());
  }
  s.params = c.extract("model.");
  s.params.check_against(UNet1d(s.config).layout());
  return s;
}

inline void save(const ModelState& s, const std::filesystem::path& path) {
  checkpoint::write_file(path, to_container(s));
}

inline ModelState load(const std::filesystem::path& path) { return model_from_container(checkpoint::read_file(path)); }

}  // namespace pcgdn
