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
#include <limits>
#include <vector>

#include "pcgdn/common.hpp"
#include "pcgdn/nn/params.hpp"

namespace pcgdn::eval {

struct TsneParams {
  double perplexity = 30.0;
  int iterations = 1000;
  std::uint64_t seed = 0;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  int exaggeration_iters = 250;
};

namespace detail {

// Row-conditional affinities with per-point bandwidth found by bisection so
// that the row entropy equals log(perplexity).
inline nn::Mat conditional_affinities(const nn::Mat& d2, double perplexity) {
  const nn::Index n = d2.rows();
  nn::Mat p = nn::Mat::Zero(n, n);
  const double target = std::log(perplexity);
  for (nn::Index i = 0; i < n; ++i) {
    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 100; ++it) {
      double sum = 0.0, wsum = 0.0;
      double dmin = std::numeric_limits<double>::infinity();
      for (nn::Index j = 0; j < n; ++j)
        if (j != i) dmin = std::min(dmin, d2(i, j));
      for (nn::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const double e = std::exp(-beta * (d2(i, j) - dmin));
        p(i, j) = e;
        sum += e;
        wsum += e * (d2(i, j) - dmin);
      }
      const double entropy = std::log(sum) + beta * wsum / sum;
      p.row(i) /= sum;
      const double diff = entropy - target;
      if (std::abs(diff) < 1e-5) break;
      if (diff > 0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
      } else {
        hi = beta;
        beta = (beta + lo) / 2.0;
      }
    }
  }
  return p;
}

}  // namespace detail

// Exact t-SNE to two dimensions. Rows of the result follow the input order.
inline nn::Mat tsne(const std::vector<nn::Vec>& x, const TsneParams& params = {}) {
  const auto n = static_cast<nn::Index>(x.size());
  if (!(params.perplexity > 0.0)) throw ConfigError("tsne: perplexity must be > 0");
  if (static_cast<double>(n - 1) < 3.0 * params.perplexity)
    throw DataError(str_cat("tsne: ", n, " points are too few for perplexity ", params.perplexity,
                            " (need at least 3 * perplexity + 1)"));
  nn::Mat d2(n, n);
  for (nn::Index i = 0; i < n; ++i)
    for (nn::Index j = 0; j < n; ++j) d2(i, j) = (x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]).squaredNorm();

  nn::Mat p = detail::conditional_affinities(d2, params.perplexity);
  p = (p + p.transpose()).eval() / (2.0 * static_cast<double>(n));
  p = p.cwiseMax(1e-12);

  Rng rng(params.seed);
  nn::Mat y(n, 2);
  for (nn::Index i = 0; i < n; ++i)
    for (int c = 0; c < 2; ++c) y(i, c) = rng.normal(0.0, 1e-4);
  nn::Mat update = nn::Mat::Zero(n, 2);
  nn::Mat gains = nn::Mat::Ones(n, 2);
  nn::Mat num(n, n), grad(n, 2);

  for (int it = 0; it < params.iterations; ++it) {
    const double exag = it < params.exaggeration_iters ? params.early_exaggeration : 1.0;
    const double momentum = it < params.exaggeration_iters ? 0.5 : 0.8;
    double z = 0.0;
    for (nn::Index i = 0; i < n; ++i)
      for (nn::Index j = 0; j < n; ++j) {
        num(i, j) = i == j ? 0.0 : 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
        z += num(i, j);
      }
    grad.setZero();
    for (nn::Index i = 0; i < n; ++i)
      for (nn::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const double q = std::max(num(i, j) / z, 1e-12);
        grad.row(i) += 4.0 * (exag * p(i, j) - q) * num(i, j) * (y.row(i) - y.row(j));
      }
    for (nn::Index i = 0; i < n; ++i)
      for (int c = 0; c < 2; ++c) {
        const bool same_sign = (grad(i, c) > 0) == (update(i, c) > 0);
        gains(i, c) = std::max(same_sign ? gains(i, c) * 0.8 : gains(i, c) + 0.2, 0.01);
        update(i, c) = momentum * update(i, c) - params.learning_rate * gains(i, c) * grad(i, c);
        y(i, c) += update(i, c);
      }
    const Eigen::RowVector2d mean = y.colwise().mean();
    y.rowwise() -= mean;
  }
  return y;
}

}  // namespace pcgdn::eval
