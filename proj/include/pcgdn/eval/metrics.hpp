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
#include <cstddef>
#include <limits>
#include <vector>

#include "pcgdn/common.hpp"
#include "pcgdn/nn/params.hpp"

namespace pcgdn::eval {

// counts[t][p]: samples of true class t predicted as p.
struct ConfusionMatrix {
  std::vector<std::vector<long>> counts;

  explicit ConfusionMatrix(std::size_t n_classes = 0) : counts(n_classes, std::vector<long>(n_classes, 0)) {}
  std::size_t classes() const { return counts.size(); }
  long total() const {
    long s = 0;
    for (const auto& r : counts)
      for (auto c : r) s += c;
    return s;
  }
};

inline ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted, std::size_t n_classes) {
  if (truth.size() != predicted.size()) throw DataError("confusion: label and prediction counts differ");
  ConfusionMatrix cm(n_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || predicted[i] < 0 || static_cast<std::size_t>(truth[i]) >= n_classes ||
        static_cast<std::size_t>(predicted[i]) >= n_classes)
      throw DataError(str_cat("confusion: class index out of range at ", i));
    ++cm.counts[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  return cm;
}

struct BinaryRates {
  double se = 0.0, sp = 0.0, acc = 0.0;
};

struct ClassificationMetrics {
  std::vector<BinaryRates> per_class;  // one-vs-rest
  BinaryRates macro;                   // unweighted mean over classes with defined rates
  double overall_accuracy = 0.0;       // trace / total
};

// One-vs-rest sensitivity, specificity and accuracy per class, macro-averaged.
// A rate with an empty denominator is NaN and left out of the macro mean.
inline ClassificationMetrics classification_metrics(const ConfusionMatrix& cm) {
  const std::size_t n = cm.classes();
  const double total = static_cast<double>(cm.total());
  if (total <= 0) throw DataError("classification_metrics: empty confusion matrix");
  ClassificationMetrics m;
  double trace = 0.0;
  double sum_se = 0, sum_sp = 0, sum_acc = 0;
  int n_se = 0, n_sp = 0, n_acc = 0;
  for (std::size_t c = 0; c < n; ++c) {
    double tp = static_cast<double>(cm.counts[c][c]);
    double fn = 0, fp = 0;
    for (std::size_t o = 0; o < n; ++o)
      if (o != c) {
        fn += static_cast<double>(cm.counts[c][o]);
        fp += static_cast<double>(cm.counts[o][c]);
      }
    const double tn = total - tp - fn - fp;
    trace += tp;
    BinaryRates r;
    r.se = tp + fn > 0 ? tp / (tp + fn) : std::numeric_limits<double>::quiet_NaN();
    r.sp = tn + fp > 0 ? tn / (tn + fp) : std::numeric_limits<double>::quiet_NaN();
    r.acc = (tp + tn) / total;
    if (!std::isnan(r.se)) sum_se += r.se, ++n_se;
    if (!std::isnan(r.sp)) sum_sp += r.sp, ++n_sp;
    sum_acc += r.acc, ++n_acc;
    m.per_class.push_back(r);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  m.macro.se = n_se ? sum_se / n_se : nan;
  m.macro.sp = n_sp ? sum_sp / n_sp : nan;
  m.macro.acc = n_acc ? sum_acc / n_acc : nan;
  m.overall_accuracy = trace / total;
  return m;
}

// Mean silhouette coefficient with Euclidean distance. Points in singleton
// clusters score 0.
inline double silhouette(const std::vector<nn::Vec>& points, const std::vector<int>& labels) {
  const std::size_t n = points.size();
  if (labels.size() != n) throw DataError("silhouette: label count mismatch");
  std::vector<int> uniq(labels);
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  if (uniq.size() < 2 || uniq.size() >= n) throw DataError("silhouette: need 2 <= clusters < points");
  const std::size_t k = uniq.size();
  auto idx = [&](int l) { return static_cast<std::size_t>(std::lower_bound(uniq.begin(), uniq.end(), l) - uniq.begin()); };
  std::vector<std::size_t> size(k, 0);
  for (int l : labels) ++size[idx(l)];
  double total = 0.0;
  std::vector<double> sum(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sum[idx(labels[j])] += (points[i] - points[j]).norm();
    const std::size_t own = idx(labels[i]);
    if (size[own] < 2) continue;
    const double a = sum[own] / static_cast<double>(size[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != own) b = std::min(b, sum[c] / static_cast<double>(size[c]));
    const double d = std::max(a, b);
    total += d > 0 ? (b - a) / d : 0.0;
  }
  return total / static_cast<double>(n);
}

}  // namespace pcgdn::eval
