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
#include <cstdint>
#include <string>
#include <vector>

#include "pcgdn/common.hpp"

namespace pcgdn {

enum class Split { Train, Val, Test };

inline std::string to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

inline Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw DataError("unknown split '" + s + "'");
}

struct SplitRatios {
  double train = 0.8, val = 0.1, test = 0.1;

  void validate() const {
    if (train < 0.0 || val < 0.0 || test < 0.0) throw ConfigError("split ratios must be non-negative");
    if (std::abs(train + val + test - 1.0) > 1e-9)
      throw ConfigError(str_cat("split ratios must sum to 1, got ", train + val + test));
  }
};

// Split sizes for n items: train and val rounded to nearest, test takes the rest.
inline std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& r) {
  r.validate();
  const auto tr = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(r.train * static_cast<double>(n))));
  const auto va = std::min<std::size_t>(n - tr, static_cast<std::size_t>(std::llround(r.val * static_cast<double>(n))));
  return {tr, va, n - tr - va};
}

// Seeded assignment of n items (in a fixed caller-defined order) to splits.
inline std::vector<Split> assign_splits(std::size_t n, const SplitRatios& r, std::uint64_t seed) {
  const auto sizes = split_sizes(n, r);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng(seed).shuffle(order);
  std::vector<Split> out(n);
  for (std::size_t k = 0; k < n; ++k)
    out[order[k]] = k < sizes[0] ? Split::Train : k < sizes[0] + sizes[1] ? Split::Val : Split::Test;
  return out;
}

}  // namespace pcgdn
