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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcgdn/common.hpp"
#include "pcgdn/nn/layers.hpp"
#include "pcgdn/nn/lstm.hpp"
#include "pcgdn/nn/params.hpp"

namespace pcgdn {

using nn::Mat;
using nn::Vec;
using nn::Index;

enum class SkipMerge { Concat, Sum };

inline std::string to_string(SkipMerge m) { return m == SkipMerge::Concat ? "concat" : "sum"; }
inline SkipMerge parse_skip_merge(const std::string& s) {
  if (s == "concat") return SkipMerge::Concat;
  if (s == "sum") return SkipMerge::Sum;
  throw ConfigError("unknown skip_merge '" + s + "' (expected concat or sum)");
}

struct ModelConfig {
  int levels = 4;
  int base_channels = 16;
  int channel_multiplier = 2;
  int kernel_size = 15;
  double dropout_rate = 0.1;
  int lstm_hidden_per_direction = 0;  // 0: half the level's channel count
  bool lstm_skips = true;             // false: identity skips (plain U-Net)
  SkipMerge skip_merge = SkipMerge::Concat;
  int projection_hidden = 64;
  int projection_dim = 32;
  int input_len = 3008;

  int channels(int level) const {
    int c = base_channels;
    for (int i = 0; i < level; ++i) c *= channel_multiplier;
    return c;
  }
  int bottleneck_channels() const { return channels(levels); }
  int lstm_hidden(int level) const {
    if (lstm_hidden_per_direction == 0) return channels(level) / 2;
    int h = lstm_hidden_per_direction;
    for (int i = 0; i < level; ++i) h *= channel_multiplier;
    return h;
  }
  int skip_width(int level) const { return lstm_skips ? 2 * lstm_hidden(level) : channels(level); }

  void validate() const {
    if (levels < 1) throw ConfigError("model: levels must be >= 1");
    if (base_channels < 1 || channel_multiplier < 1) throw ConfigError("model: channel counts must be positive");
    if (kernel_size < 1 || kernel_size % 2 == 0) throw ConfigError("model: kernel_size must be a positive odd integer");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("model: dropout_rate must lie in [0,1)");
    if (projection_hidden < 1 || projection_dim < 1) throw ConfigError("model: projection sizes must be positive");
    if (input_len < 1 || input_len % (1 << levels) != 0)
      throw ConfigError(str_cat("model: input_len ", input_len, " is not divisible by 2^levels = ", 1 << levels));
    if (lstm_hidden_per_direction < 0) throw ConfigError("model: lstm_hidden_per_direction must be >= 0");
    if (lstm_skips)
      for (int l = 0; l < levels; ++l)
        if (lstm_hidden(l) < 1) throw ConfigError(str_cat("model: level ", l, " has no room for an LSTM hidden state"));
    if (skip_merge == SkipMerge::Sum)
      for (int l = 0; l < levels; ++l)
        if (skip_width(l) != channels(l))
          throw ConfigError(str_cat("model: sum merge needs skip width == channels at level ", l));
  }
};

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"levels", c.levels},
                     {"base_channels", c.base_channels},
                     {"channel_multiplier", c.channel_multiplier},
                     {"kernel_size", c.kernel_size},
                     {"dropout_rate", c.dropout_rate},
                     {"lstm_hidden_per_direction", c.lstm_hidden_per_direction},
                     {"lstm_skips", c.lstm_skips},
                     {"skip_merge", to_string(c.skip_merge)},
                     {"projection_hidden", c.projection_hidden},
                     {"projection_dim", c.projection_dim},
                     {"input_len", c.input_len}};
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.levels = j.at("levels").get<int>();
  c.base_channels = j.at("base_channels").get<int>();
  c.channel_multiplier = j.at("channel_multiplier").get<int>();
  c.kernel_size = j.at("kernel_size").get<int>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.lstm_hidden_per_direction = j.at("lstm_hidden_per_direction").get<int>();
  c.lstm_skips = j.at("lstm_skips").get<bool>();
  c.skip_merge = parse_skip_merge(j.at("skip_merge").get<std::string>());
  c.projection_hidden = j.at("projection_hidden").get<int>();
  c.projection_dim = j.at("projection_dim").get<int>();
  c.input_len = j.at("input_len").get<int>();
}

// Unit-norm point in the contrastive space.
struct Embedding {
  Vec vector;
};

// Trainable parameters plus the record needed to reproduce them.
struct ModelState {
  ModelConfig config;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  nn::ParamStore params;
};

enum class Mode { Inference, Training };

// Per-forward record of every intermediate the backward pass needs.
struct UNetTape {
  struct Level {
    Mat conv_col, enc_act, dropout_mask, skip_in;  // skip_in = encoder features after dropout
    Mat down_col;
    nn::BiLstm::Tape lstm;
    Mat up_in, dec_col, dec_act;
  };
  std::vector<Level> levels;
  Mat bott_col, bottleneck;
  Mat out_col;
  // projection head
  Vec pooled, fc1_act, proj_raw;
  double proj_norm = 1.0;
};

// Layer graph for a ModelConfig. Cheap to build; parameter ids are a pure
// function of the config.
class UNet1d {
 public:
  explicit UNet1d(const ModelConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const int k = cfg.kernel_size;
    for (int l = 0; l < cfg.levels; ++l) {
      const std::string p = "enc" + std::to_string(l);
      const int in = l == 0 ? 1 : cfg.channels(l - 1);
      enc_conv_.emplace_back(layout_, p + ".conv", in, cfg.channels(l), k);
      down_.emplace_back(layout_, p + ".down", cfg.channels(l), cfg.channels(l));
    }
    bott_conv_ = nn::Conv1d(layout_, "bottleneck.conv", cfg.channels(cfg.levels - 1), cfg.bottleneck_channels(), k);
    if (cfg.lstm_skips)
      for (int l = 0; l < cfg.levels; ++l)
        skip_lstm_.emplace_back(layout_, "skip" + std::to_string(l) + ".lstm", cfg.channels(l), cfg.lstm_hidden(l));
    up_.resize(static_cast<std::size_t>(cfg.levels));
    dec_conv_.resize(static_cast<std::size_t>(cfg.levels));
    for (int l = cfg.levels - 1; l >= 0; --l) {
      const std::string p = "dec" + std::to_string(l);
      const int in = l == cfg.levels - 1 ? cfg.bottleneck_channels() : cfg.channels(l + 1);
      up_[l] = nn::UpConv(layout_, p + ".up", in, cfg.channels(l));
      const int merged = cfg.skip_merge == SkipMerge::Concat ? cfg.channels(l) + cfg.skip_width(l) : cfg.channels(l);
      dec_conv_[l] = nn::Conv1d(layout_, p + ".conv", merged, cfg.channels(l), k);
    }
    out_conv_ = nn::Conv1d(layout_, "out.conv", cfg.channels(0), 1, 1);
    fc1_ = nn::Dense(layout_, "proj.fc1", cfg.bottleneck_channels(), cfg.projection_hidden);
    fc2_ = nn::Dense(layout_, "proj.fc2", cfg.projection_hidden, cfg.projection_dim);
  }

  const nn::ParamLayout& layout() const { return layout_; }
  const ModelConfig& config() const { return cfg_; }

  std::size_t lstm_param_count() const {
    std::size_t n = 0;
    for (const auto& s : skip_lstm_) n += s.param_count();
    return n;
  }

  void init(nn::ParamStore& p, std::uint64_t seed) const {
    for (const auto& c : enc_conv_) c.init(p, seed);
    for (const auto& d : down_) d.init(p, seed);
    bott_conv_.init(p, seed);
    for (const auto& s : skip_lstm_) s.init(p, seed);
    for (const auto& u : up_) u.init(p, seed);
    for (const auto& c : dec_conv_) c.init(p, seed);
    out_conv_.init(p, seed, 3.0);
    fc1_.init(p, seed);
    fc2_.init(p, seed, 3.0);
  }

  // x: 1 x input_len. Returns y (1 x input_len); fills `tape` (always) with
  // intermediates. Dropout is active only in training mode.
  Mat forward(const nn::ParamStore& p, const Mat& x, Mode mode, Rng* dropout_rng, UNetTape& tape) const {
    const int levels = cfg_.levels;
    tape.levels.assign(static_cast<std::size_t>(levels), {});
    Mat h = x;
    for (int l = 0; l < levels; ++l) {
      auto& lv = tape.levels[l];
      lv.enc_act = nn::leaky_relu(enc_conv_[l].forward(p, h, lv.conv_col));
      if (mode == Mode::Training && cfg_.dropout_rate > 0.0) {
        if (!dropout_rng) throw ConfigError("training-mode forward requires a dropout stream");
        lv.dropout_mask = nn::dropout_mask(lv.enc_act.rows(), lv.enc_act.cols(), cfg_.dropout_rate, *dropout_rng);
        lv.skip_in = lv.enc_act.cwiseProduct(lv.dropout_mask);
      } else {
        lv.dropout_mask.resize(0, 0);
        lv.skip_in = lv.enc_act;
      }
      h = down_[l].forward(p, lv.skip_in, lv.down_col);
    }
    tape.bottleneck = nn::leaky_relu(bott_conv_.forward(p, h, tape.bott_col));

    Mat d = tape.bottleneck;
    for (int l = levels - 1; l >= 0; --l) {
      auto& lv = tape.levels[l];
      lv.up_in = d;
      const Mat u = up_[l].forward(p, d);
      const Mat s = cfg_.lstm_skips ? skip_lstm_[l].forward(p, lv.skip_in, lv.lstm) : lv.skip_in;
      Mat merged;
      if (cfg_.skip_merge == SkipMerge::Concat) {
        merged.resize(u.rows() + s.rows(), u.cols());
        merged.topRows(u.rows()) = u;
        merged.bottomRows(s.rows()) = s;
      } else {
        merged = u + s;
      }
      lv.dec_act = nn::leaky_relu(dec_conv_[l].forward(p, merged, lv.dec_col));
      d = lv.dec_act;
    }
    return out_conv_.forward(p, d, tape.out_col);
  }

  // Projection head: temporal mean, dense, leaky ReLU, dense, L2 normalize.
  Vec project(const nn::ParamStore& p, const Mat& bottleneck, UNetTape& tape) const {
    if (!bottleneck.allFinite()) throw NumericalError("projection: non-finite bottleneck features");
    tape.pooled = bottleneck.rowwise().mean();
    tape.fc1_act = nn::leaky_relu(fc1_.forward(p, tape.pooled));
    tape.proj_raw = fc2_.forward(p, tape.fc1_act);
    tape.proj_norm = std::max(tape.proj_raw.norm(), 1e-12);
    return tape.proj_raw / tape.proj_norm;
  }

  // Accumulates gradients given d(loss)/dy and (optionally) d(loss)/dz for
  // the normalized embedding.
  void backward(const nn::ParamStore& p, const UNetTape& tape, const Mat& dy, const Vec* dz, nn::Grads& g) const {
    const int levels = cfg_.levels;
    Mat dd = out_conv_.backward(p, tape.out_col, dy, g);
    std::vector<Mat> dskip(static_cast<std::size_t>(levels));
    for (int l = 0; l < levels; ++l) {
      const auto& lv = tape.levels[l];
      const Mat dpre = nn::leaky_relu_backward(lv.dec_act, dd);
      const Mat dmerged = dec_conv_[l].backward(p, lv.dec_col, dpre, g);
      const Index cu = cfg_.channels(l);
      Mat du, ds;
      if (cfg_.skip_merge == SkipMerge::Concat) {
        du = dmerged.topRows(cu);
        ds = dmerged.bottomRows(dmerged.rows() - cu);
      } else {
        du = dmerged;
        ds = dmerged;
      }
      dskip[l] = cfg_.lstm_skips ? skip_lstm_[l].backward(p, lv.lstm, ds, g) : ds;
      dd = up_[l].backward(p, lv.up_in, du, g);
    }
    // dd is now d(loss)/d(bottleneck) from the decoder path.
    if (dz) {
      const Vec z = tape.proj_raw / tape.proj_norm;
      const Vec du = ((*dz) - z * z.dot(*dz)) / tape.proj_norm;
      const Mat dh1 = fc2_.backward(p, tape.fc1_act, du, g);
      const Mat dpre1 = nn::leaky_relu_backward(tape.fc1_act, dh1);
      const Mat dpooled = fc1_.backward(p, tape.pooled, dpre1, g);
      const double inv_t = 1.0 / static_cast<double>(tape.bottleneck.cols());
      dd.colwise() += dpooled.col(0) * inv_t;
    }
    Mat dh = bott_conv_.backward(p, tape.bott_col, nn::leaky_relu_backward(tape.bottleneck, dd), g);
    for (int l = levels - 1; l >= 0; --l) {
      const auto& lv = tape.levels[l];
      Mat dskip_in = down_[l].backward(p, lv.down_col, dh, g) + dskip[l];
      if (lv.dropout_mask.size() > 0) dskip_in = dskip_in.cwiseProduct(lv.dropout_mask);
      const Mat dpre = nn::leaky_relu_backward(lv.enc_act, dskip_in);
      dh = enc_conv_[l].backward(p, lv.conv_col, dpre, g);
    }
  }

 private:
  ModelConfig cfg_;
  nn::ParamLayout layout_;
  std::vector<nn::Conv1d> enc_conv_;
  std::vector<nn::DownConv> down_;
  nn::Conv1d bott_conv_;
  std::vector<nn::BiLstm> skip_lstm_;
  std::vector<nn::UpConv> up_;
  std::vector<nn::Conv1d> dec_conv_;
  nn::Conv1d out_conv_;
  nn::Dense fc1_, fc2_;
};

// Deterministic initialization: fan-in scaled uniform convolution and dense
// weights, orthogonal recurrent weights.
inline ModelState init_model(const ModelConfig& config, std::uint64_t seed) {
  const UNet1d net(config);
  ModelState s;
  s.config = config;
  s.seed = seed;
  s.params = nn::ParamStore::zeros(net.layout());
  net.init(s.params, seed);
  return s;
}

struct ForwardResult {
  Mat denoised;                  // m x input_len
  std::vector<Mat> bottlenecks;  // per row: channels x (input_len / 2^levels)
};

// Batched inference-mode forward. x is m x input_len.
inline ForwardResult forward(const ModelState& state, const Mat& x) {
  const UNet1d net(state.config);
  if (x.cols() != state.config.input_len)
    throw DataError(str_cat("forward: segment length ", x.cols(), " != model input_len ", state.config.input_len));
  if (!x.allFinite()) throw DataError("forward: non-finite input");
  ForwardResult r;
  r.denoised.resize(x.rows(), x.cols());
  UNetTape tape;
  for (Index i = 0; i < x.rows(); ++i) {
    r.denoised.row(i) = net.forward(state.params, x.row(i), Mode::Inference, nullptr, tape);
    r.bottlenecks.push_back(tape.bottleneck);
  }
  return r;
}

inline std::vector<Embedding> project(const ModelState& state, const std::vector<Mat>& bottlenecks) {
  const UNet1d net(state.config);
  std::vector<Embedding> out;
  UNetTape tape;
  for (const auto& b : bottlenecks) out.push_back({net.project(state.params, b, tape)});
  return out;
}

// Zero-pads `x` symmetrically to `len` (or crops symmetrically when longer).
inline std::vector<double> fit_to_length(std::span<const double> x, std::size_t len) {
  std::vector<double> out(len, 0.0);
  if (x.size() <= len) {
    const std::size_t pad = (len - x.size()) / 2;
    std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(pad));
  } else {
    const std::size_t crop = (x.size() - len) / 2;
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(crop), len, out.begin());
  }
  return out;
}

// Inverse of fit_to_length for the padding case.
inline std::vector<double> unfit_length(std::span<const double> y, std::size_t original_len) {
  if (original_len > y.size()) throw DataError("unfit_length: original longer than model output");
  const std::size_t pad = (y.size() - original_len) / 2;
  return {y.begin() + static_cast<std::ptrdiff_t>(pad), y.begin() + static_cast<std::ptrdiff_t>(pad + original_len)};
}

// Denoises one segment of at most input_len samples (padded then cropped).
inline std::vector<double> denoise_segment(const ModelState& state, std::span<const double> x) {
  const auto len = static_cast<std::size_t>(state.config.input_len);
  if (x.size() > len)
    throw DataError(str_cat("denoise_segment: ", x.size(), " samples exceed model input_len ", len));
  const auto padded = fit_to_length(x, len);
  Mat row = Eigen::Map<const Eigen::RowVectorXd>(padded.data(), static_cast<Index>(len));
  const auto r = forward(state, row);
  std::vector<double> y(len);
  Eigen::Map<Eigen::RowVectorXd>(y.data(), static_cast<Index>(len)) = r.denoised.row(0);
  return unfit_length(y, x.size());
}

}  // namespace pcgdn
