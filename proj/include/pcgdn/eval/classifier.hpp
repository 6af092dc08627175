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

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcgdn/audio.hpp"
#include "pcgdn/checkpoint.hpp"
#include "pcgdn/common.hpp"
#include "pcgdn/model.hpp"
#include "pcgdn/nn/layers.hpp"
#include "pcgdn/nn/lstm.hpp"
#include "pcgdn/nn/optimizer.hpp"

namespace pcgdn::eval {

struct ClassifierConfig {
  int input_len = 3008;
  int blocks = 3;
  int base_channels = 8;
  int kernel_size = 9;
  int lstm_hidden = 16;
  double learning_rate = 1e-3;
  int epochs = 30;
  int batch_size = 16;
  std::uint64_t seed = 0;

  int channels(int b) const { return base_channels << b; }

  void validate() const {
    if (blocks < 1) throw ConfigError("classifier: blocks must be >= 1");
    if (input_len < 1 || input_len % (1 << blocks) != 0)
      throw ConfigError(str_cat("classifier: input_len ", input_len, " not divisible by 2^blocks"));
    if (base_channels < 1 || lstm_hidden < 1) throw ConfigError("classifier: sizes must be positive");
    if (kernel_size < 1 || kernel_size % 2 == 0) throw ConfigError("classifier: kernel_size must be odd");
    if (!(learning_rate > 0.0)) throw ConfigError("classifier: learning_rate must be > 0");
    if (epochs < 0 || batch_size < 1) throw ConfigError("classifier: bad epochs or batch_size");
  }
};

inline void to_json(nlohmann::json& j, const ClassifierConfig& c) {
  j = nlohmann::json{{"input_len", c.input_len},         {"blocks", c.blocks},
                     {"base_channels", c.base_channels}, {"kernel_size", c.kernel_size},
                     {"lstm_hidden", c.lstm_hidden},     {"learning_rate", c.learning_rate},
                     {"epochs", c.epochs},               {"batch_size", c.batch_size},
                     {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, ClassifierConfig& c) {
  c.input_len = j.at("input_len").get<int>();
  c.blocks = j.at("blocks").get<int>();
  c.base_channels = j.at("base_channels").get<int>();
  c.kernel_size = j.at("kernel_size").get<int>();
  c.lstm_hidden = j.at("lstm_hidden").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
}

struct ClassifierState {
  ClassifierConfig config;
  nn::ParamStore params;
};

using Probabilities = std::array<double, kNumClasses>;

// Conv blocks (conv, leaky ReLU, stride-2 reduction), a BiLSTM over the
// reduced sequence, temporal mean, dense five-way head.
class CnnBiLstm {
 public:
  struct Tape {
    std::vector<nn::Mat> conv_col, act, down_col;
    nn::BiLstm::Tape lstm;
    nn::Vec pooled;
    nn::Index steps = 0;
  };

  explicit CnnBiLstm(const ClassifierConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    for (int b = 0; b < cfg.blocks; ++b) {
      const std::string p = "block" + std::to_string(b);
      conv_.emplace_back(layout_, p + ".conv", b == 0 ? 1 : cfg.channels(b - 1), cfg.channels(b), cfg.kernel_size);
      down_.emplace_back(layout_, p + ".down", cfg.channels(b), cfg.channels(b));
    }
    lstm_ = nn::BiLstm(layout_, "lstm", cfg.channels(cfg.blocks - 1), cfg.lstm_hidden);
    head_ = nn::Dense(layout_, "head", 2 * cfg.lstm_hidden, kNumClasses);
  }

  const nn::ParamLayout& layout() const { return layout_; }

  void init(nn::ParamStore& p, std::uint64_t seed) const {
    for (const auto& c : conv_) c.init(p, seed);
    for (const auto& d : down_) d.init(p, seed);
    lstm_.init(p, seed);
    head_.init(p, seed, 3.0);
  }

  // Returns logits.
  nn::Vec forward(const nn::ParamStore& p, const nn::Mat& x, Tape& t) const {
    const auto n = static_cast<std::size_t>(cfg_.blocks);
    t.conv_col.resize(n);
    t.act.resize(n);
    t.down_col.resize(n);
    nn::Mat h = x;
    for (std::size_t b = 0; b < n; ++b) {
      t.act[b] = nn::leaky_relu(conv_[b].forward(p, h, t.conv_col[b]));
      h = down_[b].forward(p, t.act[b], t.down_col[b]);
    }
    const nn::Mat s = lstm_.forward(p, h, t.lstm);
    t.steps = s.cols();
    t.pooled = s.rowwise().mean();
    return head_.forward(p, t.pooled);
  }

  void backward(const nn::ParamStore& p, const Tape& t, const nn::Vec& dlogits, nn::Grads& g) const {
    const nn::Mat dpooled = head_.backward(p, t.pooled, dlogits, g);
    nn::Mat ds = dpooled.col(0).replicate(1, t.steps) / static_cast<double>(t.steps);
    nn::Mat dh = lstm_.backward(p, t.lstm, ds, g);
    for (int b = cfg_.blocks - 1; b >= 0; --b) {
      const auto i = static_cast<std::size_t>(b);
      const nn::Mat dact = down_[i].backward(p, t.down_col[i], dh, g);
      dh = conv_[i].backward(p, t.conv_col[i], nn::leaky_relu_backward(t.act[i], dact), g);
    }
  }

 private:
  ClassifierConfig cfg_;
  nn::ParamLayout layout_;
  std::vector<nn::Conv1d> conv_;
  std::vector<nn::DownConv> down_;
  nn::BiLstm lstm_;
  nn::Dense head_;
};

// Fixed-length, unit-RMS input row. Scale normalization keeps the classifier
// insensitive to the overall level of noisy or denoised inputs.
inline nn::Mat classifier_input(std::span<const double> samples, int input_len) {
  auto v = fit_to_length(samples, static_cast<std::size_t>(input_len));
  const double r = rms(v);
  if (r > 0.0)
    for (auto& s : v) s /= r;
  return Eigen::Map<const Eigen::RowVectorXd>(v.data(), input_len);
}

inline Probabilities softmax(const nn::Vec& logits) {
  Probabilities p{};
  const double mx = logits.maxCoeff();
  double sum = 0.0;
  for (int c = 0; c < kNumClasses; ++c) sum += (p[static_cast<std::size_t>(c)] = std::exp(logits(c) - mx));
  for (auto& v : p) v /= sum;
  return p;
}

inline int class_index(PcgClass c) { return static_cast<int>(c); }

// Supervised training with softmax cross-entropy and Adam. Every class must
// be represented.
inline ClassifierState train_classifier(const std::vector<AudioSegment>& labeled, const ClassifierConfig& cfg,
                                        const std::function<void(int, double)>& on_epoch = {}) {
  cfg.validate();
  std::array<int, kNumClasses> seen{};
  for (const auto& s : labeled) {
    if (!s.label) throw DataError("train_classifier: segment '" + s.source_id + "' has no label");
    ++seen[static_cast<std::size_t>(class_index(*s.label))];
  }
  for (int c = 0; c < kNumClasses; ++c)
    if (seen[static_cast<std::size_t>(c)] == 0)
      throw DataError(str_cat("train_classifier: class ", to_string(kAllClasses[static_cast<std::size_t>(c)]),
                              " has no training segments"));

  const CnnBiLstm net(cfg);
  ClassifierState st{cfg, nn::ParamStore::zeros(net.layout())};
  net.init(st.params, cfg.seed);
  nn::Optimizer opt(nn::OptimizerKind::Adam, cfg.learning_rate, st.params);

  std::vector<nn::Mat> inputs;
  for (const auto& s : labeled) inputs.push_back(classifier_input(s.samples, cfg.input_len));
  std::vector<std::size_t> order(labeled.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  CnnBiLstm::Tape tape;
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng(derive_seed(cfg.seed, {0xC1A55, static_cast<std::uint64_t>(epoch)})).shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(start + bs, order.size());
      nn::Grads g = nn::ParamStore::zeros_like(st.params);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        const nn::Vec logits = net.forward(st.params, inputs[i], tape);
        const auto p = softmax(logits);
        const int y = class_index(*labeled[i].label);
        epoch_loss -= std::log(std::max(p[static_cast<std::size_t>(y)], 1e-300));
        nn::Vec d(kNumClasses);
        for (int c = 0; c < kNumClasses; ++c) d(c) = (p[static_cast<std::size_t>(c)] - (c == y ? 1.0 : 0.0));
        d /= static_cast<double>(end - start);
        net.backward(st.params, tape, d, g);
      }
      if (!g.all_finite()) throw NumericalError(str_cat("train_classifier: non-finite gradient in epoch ", epoch));
      opt.step(st.params, g);
    }
    if (on_epoch) on_epoch(epoch, epoch_loss / static_cast<double>(labeled.size()));
  }
  return st;
}

inline Probabilities predict_proba(const ClassifierState& st, std::span<const double> samples) {
  const CnnBiLstm net(st.config);
  CnnBiLstm::Tape tape;
  return softmax(net.forward(st.params, classifier_input(samples, st.config.input_len), tape));
}

inline int predict(const ClassifierState& st, std::span<const double> samples) {
  const auto p = predict_proba(st, samples);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

inline void save_classifier(const ClassifierState& st, const std::filesystem::path& path) {
  checkpoint::Container c;
  c.kind = "classifier";
  c.metadata = {{"config", st.config}};
  c.add("clf.", st.params);
  checkpoint::write_file(path, c);
}

inline ClassifierState load_classifier(const std::filesystem::path& path) {
  const auto c = checkpoint::read_file(path);
  if (c.kind != "classifier") throw DataError("checkpoint '" + path.string() + "' is not a classifier");
  ClassifierState st;
  try {
    st.config = c.metadata.at("config").get<ClassifierConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("corrupt classifier metadata: ") + e.what());
  }
  st.params = c.extract("clf.");
  st.params.check_against(CnnBiLstm(st.config).layout());
  return st;
}

}  // namespace pcgdn::eval
