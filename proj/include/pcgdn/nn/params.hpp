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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pcgdn/common.hpp"

namespace pcgdn::nn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

struct ParamSpec {
  std::string name;
  Index rows = 0;
  Index cols = 0;
};

// Ordered list of named parameter shapes. Building a network against a
// layout assigns each tensor a stable integer id.
class ParamLayout {
 public:
  int add(std::string name, Index rows, Index cols) {
    specs_.push_back({std::move(name), rows, cols});
    return static_cast<int>(specs_.size()) - 1;
  }
  const std::vector<ParamSpec>& specs() const { return specs_; }
  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& s : specs_) n += static_cast<std::size_t>(s.rows * s.cols);
    return n;
  }

 private:
  std::vector<ParamSpec> specs_;
};

// Parameter values (or gradients, or optimizer moments) laid out per a
// ParamLayout.
struct ParamStore {
  std::vector<std::string> names;
  std::vector<Mat> values;

  static ParamStore zeros(const ParamLayout& layout) {
    ParamStore s;
    for (const auto& spec : layout.specs()) {
      s.names.push_back(spec.name);
      s.values.push_back(Mat::Zero(spec.rows, spec.cols));
    }
    return s;
  }

  static ParamStore zeros_like(const ParamStore& other) {
    ParamStore s;
    s.names = other.names;
    s.values.reserve(other.values.size());
    for (const auto& v : other.values) s.values.push_back(Mat::Zero(v.rows(), v.cols()));
    return s;
  }

  Mat& operator[](int id) { return values[static_cast<std::size_t>(id)]; }
  const Mat& operator[](int id) const { return values[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return values.size(); }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& v : values) n += static_cast<std::size_t>(v.size());
    return n;
  }

  int find(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    return -1;
  }

  bool all_finite() const {
    for (const auto& v : values)
      if (!v.allFinite()) return false;
    return true;
  }

  void set_zero() {
    for (auto& v : values) v.setZero();
  }

  void add_scaled(const ParamStore& other, double scale) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += scale * other.values[i];
  }

  // Throws unless names and shapes match the layout exactly.
  void check_against(const ParamLayout& layout) const {
    const auto& specs = layout.specs();
    if (specs.size() != values.size())
      throw DataError(str_cat("parameter count mismatch: expected ", specs.size(), " tensors, found ", values.size()));
    for (std::size_t i = 0; i < specs.size(); ++i) {
      if (names[i] != specs[i].name || values[i].rows() != specs[i].rows || values[i].cols() != specs[i].cols)
        throw DataError(str_cat("parameter '", names[i], "' does not match expected '", specs[i].name, "' [",
                                specs[i].rows, "x", specs[i].cols, "]"));
    }
  }
};

using Grads = ParamStore;

// Per-tensor init stream, independent of registration order.
inline Rng param_rng(std::uint64_t seed, const std::string& name) { return Rng(derive_seed(seed, {hash_string(name)})); }

inline void fill_uniform(Mat& m, double bound, Rng& rng) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-bound, bound);
}

// Orthogonal square matrix from the QR factorization of a Gaussian draw.
inline Mat random_orthogonal(Index n, Rng& rng) {
  Mat a(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < n; ++i)
    if (r(i, i) < 0) q.col(i) *= -1.0;
  return q;
}

}  // namespace pcgdn::nn
