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
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pcgdn/augment.hpp"
#include "pcgdn/common.hpp"
#include "pcgdn/data/dataset.hpp"
#include "pcgdn/eval/classifier.hpp"
#include "pcgdn/eval/report.hpp"
#include "pcgdn/eval/spectrogram.hpp"
#include "pcgdn/eval/tsne.hpp"
#include "pcgdn/model.hpp"
#include "pcgdn/segmentation.hpp"
#include "pcgdn/training.hpp"

namespace pcgdn::cli {

struct EvalSettings {
  eval::NoiseGrid grid;
  std::string degradation_kind = "hospital";
  double degradation_snr_db = 10.0;
  std::size_t classifier_max_train = 2000;  // clean training segments for the reference classifier
  eval::ClassifierConfig classifier;
  eval::TsneParams tsne;
  std::size_t embed_max_segments = 500;
  eval::SpectrogramParams spectrogram;
};

// Everything a command needs, with all defaults materialized.
struct RunConfig {
  std::filesystem::path out = "runs/default";
  std::uint64_t seed = 0;
  bool quiet = false;

  data::DatasetSpec dataset;
  std::filesystem::path manifest;  // empty: <out>/manifest.jsonl
  bool cache = true;
  std::filesystem::path cache_dir;  // empty: <out>/cache
  std::filesystem::path noise_root;  // <noise_root>/<label>/*.wav banks

  SegmentationParams segmentation;
  AugmentPolicy augment;
  ModelConfig model;
  TrainConfig train;
  bool resume = false;
  EvalSettings eval;

  std::filesystem::path manifest_path() const { return manifest.empty() ? out / "manifest.jsonl" : manifest; }
  std::filesystem::path cache_path() const { return cache_dir.empty() ? out / "cache" : cache_dir; }

  // Component seeds derive from the master seed.
  void resolve_seeds() {
    train.seed = seed;
    augment.seed = derive_seed(seed, {1});
    eval.grid.seed = derive_seed(seed, {2});
    eval.classifier.seed = derive_seed(seed, {3});
    eval.tsne.seed = derive_seed(seed, {4});
  }

  void validate() const {
    segmentation.validate();
    augment.validate();
    model.validate();
    train.validate();
    eval.classifier.validate();
    if (static_cast<std::size_t>(model.input_len) < segmentation.window_samples())
      throw ConfigError(str_cat("model.input_len ", model.input_len, " is shorter than a segment (",
                                segmentation.window_samples(), " samples)"));
  }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

inline std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
  return s;
}

inline std::vector<double> parse_doubles(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("config " + what + ": '" + item + "' is not a number");
    }
  }
  return out;
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ",") + format_double(x);
  return s;
}

// Binds config keys in both directions: reading from a parsed INI tree (and
// remembering which keys were consumed) or writing the resolved values.
class Binder {
 public:
  explicit Binder(const boost::property_tree::ptree* in) : in_(in) {}

  template <typename T>
  void bind(const std::string& section, const std::string& key, T& value) {
    known_[section].insert(key);
    if (in_) {
      const auto sec = in_->get_child_optional(section);
      if (!sec) return;
      const auto v = sec->get_optional<std::string>(key);
      if (!v) return;
      assign(section + "." + key, *v, value);
    } else {
      out_.put(section + "." + key, text(value));
    }
  }

  // Unknown sections and keys are errors.
  void reject_unknown() const {
    if (!in_) return;
    for (const auto& [section, keys] : *in_) {
      const auto it = known_.find(section);
      if (it == known_.end()) throw ConfigError("config: unknown section [" + section + "]");
      if (keys.empty() && !keys.data().empty())
        throw ConfigError("config: key '" + section + "' must be inside a section");
      for (const auto& kv : keys)
        if (!it->second.count(kv.first)) throw ConfigError("config: unknown key '" + kv.first + "' in [" + section + "]");
    }
  }

  const boost::property_tree::ptree& tree() const { return out_; }

 private:
  static void assign(const std::string&, const std::string& v, std::string& out) { out = v; }
  static void assign(const std::string&, const std::string& v, std::filesystem::path& out) { out = v; }
  static void assign(const std::string& what, const std::string& v, bool& out) {
    if (v == "true" || v == "1" || v == "yes") out = true;
    else if (v == "false" || v == "0" || v == "no") out = false;
    else throw ConfigError("config " + what + ": expected true/false, got '" + v + "'");
  }
  template <typename T>
    requires std::is_arithmetic_v<T>
  static void assign(const std::string& what, const std::string& v, T& out) {
    std::istringstream is(v);
    T t{};
    is >> t;
    if (!is || !(is >> std::ws).eof()) throw ConfigError("config " + what + ": cannot parse '" + v + "'");
    if constexpr (std::is_unsigned_v<T>)
      if (v.find('-') != std::string::npos) throw ConfigError("config " + what + ": must not be negative");
    out = t;
  }

  static std::string text(const std::string& v) { return v; }
  static std::string text(const std::filesystem::path& v) { return v.string(); }
  static std::string text(bool v) { return v ? "true" : "false"; }
  static std::string text(double v) { return format_double(v); }
  template <typename T>
    requires std::is_integral_v<T>
  static std::string text(T v) { return std::to_string(v); }

  const boost::property_tree::ptree* in_;
  boost::property_tree::ptree out_;
  std::map<std::string, std::set<std::string>> known_;
};

// Fields that are not plain scalars go through string proxies.
struct Proxies {
  std::string noise_kinds, skip_merge, optimizer, split, grid_kinds, grid_snrs;
  std::size_t expected_per_class = 0;

  void load(const RunConfig& c) {
    noise_kinds = join(c.augment.sustained_noise.kinds);
    skip_merge = to_string(c.model.skip_merge);
    optimizer = nn::to_string(c.train.optimizer);
    split = join(std::vector<double>{c.train.split.train, c.train.split.val, c.train.split.test});
    grid_kinds = join(c.eval.grid.kinds);
    grid_snrs = join(c.eval.grid.snrs_db);
    expected_per_class = c.dataset.expected_per_class.value_or(0);
  }

  void store(RunConfig& c) const {
    c.augment.sustained_noise.kinds = split_list(noise_kinds);
    c.model.skip_merge = parse_skip_merge(skip_merge);
    c.train.optimizer = nn::parse_optimizer(optimizer);
    const auto r = parse_doubles(split, "train.split");
    if (r.size() != 3) throw ConfigError("config train.split: expected three ratios");
    c.train.split = {r[0], r[1], r[2]};
    c.eval.grid.kinds = split_list(grid_kinds);
    c.eval.grid.snrs_db = parse_doubles(grid_snrs, "eval.snrs_db");
    c.dataset.expected_per_class =
        expected_per_class ? std::optional<std::size_t>(expected_per_class) : std::nullopt;
  }
};

inline void bind_all(Binder& b, RunConfig& c, Proxies& p) {
  b.bind("run", "out", c.out);
  b.bind("run", "seed", c.seed);
  b.bind("run", "quiet", c.quiet);

  b.bind("dataset", "root", c.dataset.root);
  b.bind("dataset", "expected_per_class", p.expected_per_class);
  b.bind("dataset", "manifest", c.manifest);
  b.bind("dataset", "cache", c.cache);
  b.bind("dataset", "cache_dir", c.cache_dir);
  b.bind("noise", "root", c.noise_root);

  b.bind("segmentation", "segment_len_s", c.segmentation.segment_len_s);
  b.bind("segmentation", "hop_s", c.segmentation.hop_s);
  b.bind("segmentation", "sample_rate_hz", c.segmentation.target_rate_hz);

  auto& a = c.augment;
  b.bind("augment", "time_mask_max_fraction", a.time_mask.max_fraction);
  b.bind("augment", "time_mask_count", a.time_mask.count);
  b.bind("augment", "time_mask_probability", a.time_mask.probability);
  b.bind("augment", "gain_min_db", a.gain_transition.min_db);
  b.bind("augment", "gain_max_db", a.gain_transition.max_db);
  b.bind("augment", "gain_min_duration_s", a.gain_transition.min_duration_s);
  b.bind("augment", "gain_probability", a.gain_transition.probability);
  b.bind("augment", "noise_kinds", p.noise_kinds);
  b.bind("augment", "noise_snr_low_db", a.sustained_noise.snr_low_db);
  b.bind("augment", "noise_snr_high_db", a.sustained_noise.snr_high_db);
  b.bind("augment", "noise_min_burst_fraction", a.sustained_noise.min_burst_fraction);
  b.bind("augment", "noise_max_burst_fraction", a.sustained_noise.max_burst_fraction);
  b.bind("augment", "noise_probability", a.sustained_noise.probability);

  auto& m = c.model;
  b.bind("model", "levels", m.levels);
  b.bind("model", "base_channels", m.base_channels);
  b.bind("model", "channel_multiplier", m.channel_multiplier);
  b.bind("model", "kernel_size", m.kernel_size);
  b.bind("model", "dropout_rate", m.dropout_rate);
  b.bind("model", "lstm_hidden_per_direction", m.lstm_hidden_per_direction);
  b.bind("model", "lstm_skips", m.lstm_skips);
  b.bind("model", "skip_merge", p.skip_merge);
  b.bind("model", "projection_hidden", m.projection_hidden);
  b.bind("model", "projection_dim", m.projection_dim);
  b.bind("model", "input_len", m.input_len);

  auto& t = c.train;
  b.bind("train", "learning_rate", t.learning_rate);
  b.bind("train", "batch_size", t.batch_size);
  b.bind("train", "epochs", t.epochs);
  b.bind("train", "contrastive_weight", t.contrastive_weight);
  b.bind("train", "temperature", t.temperature);
  b.bind("train", "include_positive_in_denominator", t.include_positive_in_denominator);
  b.bind("train", "optimizer", p.optimizer);
  b.bind("train", "views", t.views);
  b.bind("train", "split", p.split);
  b.bind("train", "resume", c.resume);

  auto& e = c.eval;
  b.bind("eval", "noise_kinds", p.grid_kinds);
  b.bind("eval", "snrs_db", p.grid_snrs);
  b.bind("eval", "max_segments", e.grid.max_segments);
  b.bind("eval", "degradation_kind", e.degradation_kind);
  b.bind("eval", "degradation_snr_db", e.degradation_snr_db);
  b.bind("eval", "classifier_max_train", e.classifier_max_train);
  b.bind("eval", "classifier_input_len", e.classifier.input_len);
  b.bind("eval", "classifier_blocks", e.classifier.blocks);
  b.bind("eval", "classifier_base_channels", e.classifier.base_channels);
  b.bind("eval", "classifier_kernel_size", e.classifier.kernel_size);
  b.bind("eval", "classifier_lstm_hidden", e.classifier.lstm_hidden);
  b.bind("eval", "classifier_learning_rate", e.classifier.learning_rate);
  b.bind("eval", "classifier_epochs", e.classifier.epochs);
  b.bind("eval", "classifier_batch_size", e.classifier.batch_size);
  b.bind("eval", "tsne_perplexity", e.tsne.perplexity);
  b.bind("eval", "tsne_iterations", e.tsne.iterations);
  b.bind("eval", "embed_max_segments", e.embed_max_segments);
  b.bind("eval", "spectrogram_window_s", e.spectrogram.window_s);
  b.bind("eval", "spectrogram_hop_s", e.spectrogram.hop_s);
}

}  // namespace detail

// Parses INI text. Missing keys keep their defaults; unknown keys fail.
inline RunConfig parse_config(const std::string& ini_text) {
  boost::property_tree::ptree tree;
  std::istringstream in(ini_text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig c;
  detail::Proxies p;
  p.load(c);
  detail::Binder b(&tree);
  detail::bind_all(b, c, p);
  b.reject_unknown();
  p.store(c);
  c.resolve_seeds();
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// INI text with every field, suitable for parse_config.
inline std::string render_config(const RunConfig& c) {
  RunConfig copy = c;
  detail::Proxies p;
  p.load(copy);
  detail::Binder b(nullptr);
  detail::bind_all(b, copy, p);
  std::ostringstream out;
  boost::property_tree::ini_parser::write_ini(out, b.tree());
  return out.str();
}

}  // namespace pcgdn::cli
