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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcgdn/audio.hpp"
#include "pcgdn/common.hpp"
#include "pcgdn/denoise.hpp"
#include "pcgdn/eval/classifier.hpp"
#include "pcgdn/eval/metrics.hpp"
#include "pcgdn/model.hpp"
#include "pcgdn/noise.hpp"

namespace pcgdn::eval {

// Clean reference segments. Only evaluation code accepts this type.
struct CleanSegments {
  std::vector<AudioSegment> segments;
};

// Maps a batch of signals to denoised signals of the same lengths, in order.
using Denoiser = std::function<std::vector<std::vector<double>>(const std::vector<std::vector<double>>&)>;

inline Denoiser identity_denoiser() {
  return [](const std::vector<std::vector<double>>& x) { return x; };
}

inline Denoiser model_denoiser(const ModelState& state) {
  return [state](const std::vector<std::vector<double>>& xs) {
    std::vector<std::vector<double>> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(denoise_signal(state, x));
    return out;
  };
}

struct NoiseGrid {
  std::vector<std::string> kinds = {"white", "pink", "red", "hospital", "lung"};
  std::vector<double> snrs_db = {0.0, 5.0, 10.0};
  std::size_t max_segments = 500;
  std::uint64_t seed = 0;
  std::set<std::string> unseen_kinds = {"lung"};  // kinds withheld from training
};

struct SnrRow {
  std::string kind;
  double input_snr_db = 0.0;
  double mean_output_snr_db = 0.0;
  double std_output_snr_db = 0.0;
  double mean_measured_input_snr_db = 0.0;
  std::size_t n = 0;
  bool unseen_by_training = false;
};

// Seeded subset of at most `max` items, kept in original order.
inline std::vector<std::size_t> subsample(std::size_t n, std::size_t max, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (n <= max) return idx;
  Rng(derive_seed(seed, {0x5AB5})).shuffle(idx);
  idx.resize(max);
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  for (double x : v)
    if (std::isinf(x)) return {x > 0 ? kInfiniteSnr : -kInfiniteSnr, std::numeric_limits<double>::quiet_NaN()};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0};
}

inline std::vector<double> noisy_version(const AudioSegment& clean, const std::string& kind, double snr_db,
                                         std::uint64_t seed, const NoiseBank* bank) {
  return apply_noise(clean, noise_spec_from_label(kind, snr_db, seed), bank).samples;
}

}  // namespace detail

// Output SNR for every (noise kind, input SNR) cell: mix seeded noise into
// each clean segment at the cell's SNR, denoise, compare with the clean
// reference. An exact reconstruction yields +inf for the cell mean.
inline std::vector<SnrRow> eval_snr(const Denoiser& denoiser, const CleanSegments& clean, const NoiseGrid& grid,
                                    const NoiseBank* bank = nullptr) {
  if (clean.segments.empty()) throw DataError("eval_snr: empty evaluation set");
  if (grid.kinds.empty() || grid.snrs_db.empty()) throw ConfigError("eval_snr: empty noise grid");
  const auto idx = subsample(clean.segments.size(), grid.max_segments, grid.seed);
  std::vector<SnrRow> rows;
  for (const auto& kind : grid.kinds)
    for (std::size_t s = 0; s < grid.snrs_db.size(); ++s) {
      const double snr = grid.snrs_db[s];
      std::vector<std::vector<double>> noisy;
      for (std::size_t i : idx)
        noisy.push_back(detail::noisy_version(clean.segments[i], kind, snr,
                                              derive_seed(grid.seed, {hash_string(kind), s, i}), bank));
      const auto den = denoiser(noisy);
      if (den.size() != noisy.size()) throw DataError("eval_snr: denoiser changed the number of segments");
      std::vector<double> out_snr, in_snr;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto& ref = clean.segments[idx[k]].samples;
        if (den[k].size() != ref.size()) throw DataError("eval_snr: denoiser changed a segment length");
        out_snr.push_back(snr_db(ref, den[k]));
        in_snr.push_back(snr_db(ref, noisy[k]));
      }
      SnrRow r;
      r.kind = kind;
      r.input_snr_db = snr;
      std::tie(r.mean_output_snr_db, r.std_output_snr_db) = detail::mean_std(out_snr);
      r.mean_measured_input_snr_db = detail::mean_std(in_snr).first;
      r.n = idx.size();
      r.unseen_by_training = grid.unseen_kinds.count(kind) > 0;
      rows.push_back(r);
    }
  return rows;
}

struct ConditionMetrics {
  std::string condition;  // clean, noisy, denoised
  ConfusionMatrix confusion;
  ClassificationMetrics metrics;
};

// Classifier metrics on the clean test set, its noisy version, and the
// denoised noisy version. Noise for segment i uses seed derive(noise.seed, i).
inline std::vector<ConditionMetrics> degradation_study(const ClassifierState& clf, const Denoiser& denoiser,
                                                       const CleanSegments& clean, const NoiseSpec& noise,
                                                       const NoiseBank* bank = nullptr) {
  if (clean.segments.empty()) throw DataError("degradation_study: empty test set");
  std::vector<int> truth;
  std::vector<std::vector<double>> clean_x, noisy_x;
  for (std::size_t i = 0; i < clean.segments.size(); ++i) {
    const auto& s = clean.segments[i];
    if (!s.label) throw DataError("degradation_study: segment '" + s.source_id + "' has no label");
    truth.push_back(class_index(*s.label));
    clean_x.push_back(s.samples);
    NoiseSpec spec = noise;
    spec.seed = derive_seed(noise.seed, {i});
    noisy_x.push_back(apply_noise(s, spec, bank).samples);
  }
  const auto den_x = denoiser(noisy_x);
  if (den_x.size() != truth.size()) throw DataError("degradation_study: denoised set does not match labels");

  std::vector<ConditionMetrics> out;
  auto run = [&](const std::string& name, const std::vector<std::vector<double>>& xs) {
    std::vector<int> pred;
    for (const auto& x : xs) pred.push_back(predict(clf, x));
    ConditionMetrics c{name, confusion(truth, pred, kNumClasses), {}};
    c.metrics = classification_metrics(c.confusion);
    out.push_back(std::move(c));
  };
  run("clean", clean_x);
  run("noisy", noisy_x);
  run("denoised", den_x);
  return out;
}

struct EvalReport {
  std::vector<SnrRow> snr_rows;
  std::vector<ConditionMetrics> classifier;
  nlohmann::json context;  // settings echoed into the summary

  void write_snr_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "noise_kind,input_snr_db,mean_output_snr_db,std_output_snr_db,mean_measured_input_snr_db,n,unseen_by_training\n";
    for (const auto& r : snr_rows)
      out << r.kind << ',' << format_double(r.input_snr_db) << ',' << format_double(r.mean_output_snr_db) << ','
          << format_double(r.std_output_snr_db) << ',' << format_double(r.mean_measured_input_snr_db) << ',' << r.n
          << ',' << (r.unseen_by_training ? 1 : 0) << '\n';
  }

  void write_classifier_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "condition,class,se,sp,acc\n";
    for (const auto& c : classifier) {
      for (std::size_t k = 0; k < c.metrics.per_class.size(); ++k) {
        const auto& r = c.metrics.per_class[k];
        out << c.condition << ',' << to_string(kAllClasses[k]) << ',' << format_double(r.se) << ','
            << format_double(r.sp) << ',' << format_double(r.acc) << '\n';
      }
      out << c.condition << ",macro," << format_double(c.metrics.macro.se) << ',' << format_double(c.metrics.macro.sp)
          << ',' << format_double(c.metrics.macro.acc) << '\n';
    }
  }

  nlohmann::json summary() const {
    auto num = [](double v) -> nlohmann::json {
      if (std::isnan(v)) return nullptr;
      if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
      return v;
    };
    nlohmann::json j;
    j["context"] = context;
    j["snr"] = nlohmann::json::array();
    for (const auto& r : snr_rows)
      j["snr"].push_back({{"noise_kind", r.kind},
                          {"input_snr_db", r.input_snr_db},
                          {"mean_output_snr_db", num(r.mean_output_snr_db)},
                          {"std_output_snr_db", num(r.std_output_snr_db)},
                          {"n", r.n},
                          {"unseen_by_training", r.unseen_by_training}});
    j["classifier"] = nlohmann::json::array();
    for (const auto& c : classifier)
      j["classifier"].push_back({{"condition", c.condition},
                                 {"macro_se", num(c.metrics.macro.se)},
                                 {"macro_sp", num(c.metrics.macro.sp)},
                                 {"macro_acc", num(c.metrics.macro.acc)},
                                 {"overall_accuracy", num(c.metrics.overall_accuracy)},
                                 {"confusion", c.confusion.counts}});
    return j;
  }

  void write_summary_json(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << summary().dump(2) << '\n';
  }
};

}  // namespace pcgdn::eval
