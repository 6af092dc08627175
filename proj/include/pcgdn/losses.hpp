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
#include <limits>
#include <vector>

#include "pcgdn/common.hpp"
#include "pcgdn/nn/params.hpp"

namespace pcgdn {

using nn::Mat;
using nn::Vec;
using nn::Index;

// Mean over the batch of the per-sample mean squared error. Rows are samples.
inline double recon_loss(const Mat& y, const Mat& x1) {
  if (y.rows() != x1.rows() || y.cols() != x1.cols())
    throw DataError(str_cat("recon_loss: shape mismatch ", y.rows(), "x", y.cols(), " vs ", x1.rows(), "x", x1.cols()));
  if (y.size() == 0) throw DataError("recon_loss: empty batch");
  return (y - x1).squaredNorm() / static_cast<double>(y.size());
}

// L = L_recon + lambda * L_contra.
inline double total_loss(double recon, double contra, double lambda) { return recon + lambda * contra; }

struct ContrastiveOptions {
  double temperature = 0.5;
  // SimCLR convention: every other embedding (including positives) in the
  // denominator. Default keeps negatives only (other samples' views).
  bool include_positive_in_denominator = false;
};

struct ContrastiveResult {
  double loss = 0.0;
  std::vector<std::vector<Vec>> grad;  // d(loss)/d(z) per [sample][view]
};

// Temperature-scaled contrastive loss over cosine similarities. z[i][j] is
// view j of sample i. For each (anchor, positive) pair of views of the same
// sample, the term is
//   -log( exp(sim(a, p)/tau) / sum_{views b of other samples} exp(sim(a, b)/tau) )
// and the loss is the mean over all ordered (anchor, positive) pairs.
inline ContrastiveResult contrastive_loss(const std::vector<std::vector<Vec>>& z, const ContrastiveOptions& opt,
                                          bool want_grad = true) {
  const double tau = opt.temperature;
  if (!(tau > 0.0)) throw ConfigError("contrastive_loss: temperature must be > 0");
  const std::size_t m = z.size();
  if (m < 2) throw DataError("contrastive_loss: need at least 2 samples in the batch (no negatives otherwise)");
  const std::size_t k = z[0].size();
  if (k < 2) throw DataError("contrastive_loss: need at least 2 views per sample");
  for (const auto& views : z)
    if (views.size() != k) throw DataError("contrastive_loss: ragged view counts");

  // Flatten and normalize.
  const std::size_t n = m * k;
  const Index dim = z[0][0].size();
  Mat unit(dim, static_cast<Index>(n));
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const auto a = i * k + j;
      if (z[i][j].size() != dim) throw DataError("contrastive_loss: embedding dimension mismatch");
      norms[a] = z[i][j].norm();
      if (!(norms[a] > 0.0) || !std::isfinite(norms[a])) throw NumericalError("contrastive_loss: zero or non-finite embedding");
      unit.col(static_cast<Index>(a)) = z[i][j] / norms[a];
    }
  const Mat sim = unit.transpose() * unit;
  auto sample_of = [k](std::size_t a) { return a / k; };

  const double pairs = static_cast<double>(m * k * (k - 1));
  Mat dsim = Mat::Zero(static_cast<Index>(n), static_cast<Index>(n));  // d(loss)/d(sim(a,b)) w.r.t. anchor a
  double total = 0.0;
  std::vector<double> w(n);
  for (std::size_t a = 0; a < n; ++a) {
    // Denominator set for this anchor.
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < n; ++b) {
      const bool neg = sample_of(b) != sample_of(a);
      const bool inc = neg || (opt.include_positive_in_denominator && b != a);
      if (inc) mx = std::max(mx, sim(a, b) / tau);
    }
    double denom = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const bool neg = sample_of(b) != sample_of(a);
      const bool inc = neg || (opt.include_positive_in_denominator && b != a);
      w[b] = inc ? std::exp(sim(a, b) / tau - mx) : 0.0;
      denom += w[b];
    }
    const double log_denom = mx + std::log(denom);
    for (std::size_t p = 0; p < n; ++p) {
      if (p == a || sample_of(p) != sample_of(a)) continue;
      total += -sim(a, p) / tau + log_denom;
      if (want_grad) {
        dsim(a, p) -= 1.0 / (tau * pairs);
        for (std::size_t b = 0; b < n; ++b)
          if (w[b] > 0.0) dsim(a, b) += (w[b] / denom) / (tau * pairs);
      }
    }
  }

  ContrastiveResult r;
  r.loss = total / pairs;
  if (!want_grad) return r;
  // sim(a,b) = u_a . u_b, so d/du_a gets dsim(a,b) u_b and d/du_b gets dsim(a,b) u_a.
  const Mat dunit = unit * (dsim + dsim.transpose());
  r.grad.assign(m, std::vector<Vec>(k));
  for (std::size_t a = 0; a < n; ++a) {
    const Vec u = unit.col(static_cast<Index>(a));
    const Vec du = dunit.col(static_cast<Index>(a));
    r.grad[sample_of(a)][a % k] = (du - u * u.dot(du)) / norms[a];
  }
  return r;
}

}  // namespace pcgdn
