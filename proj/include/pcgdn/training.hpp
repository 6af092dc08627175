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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcgdn/audio.hpp"
#include "pcgdn/augment.hpp"
#include "pcgdn/checkpoint.hpp"
#include "pcgdn/common.hpp"
#include "pcgdn/losses.hpp"
#include "pcgdn/model.hpp"
#include "pcgdn/nn/optimizer.hpp"
#include "pcgdn/split.hpp"

namespace pcgdn {

struct TrainConfig {
  double learning_rate = 0.6e-3;
  int batch_size = 16;
  int epochs = 60;
  double contrastive_weight = 0.1;  // lambda
  double temperature = 0.5;         // tau
  bool include_positive_in_denominator = false;
  nn::OptimizerKind optimizer = nn::OptimizerKind::Adam;
  std::uint64_t seed = 0;
  SplitRatios split;
  int views = 2;

  ContrastiveOptions contrastive() const { return {temperature, include_positive_in_denominator}; }

  void validate() const {
    if (!(temperature > 0.0)) throw ConfigError("train: temperature must be > 0");
    if (!(contrastive_weight >= 0.0)) throw ConfigError("train: contrastive_weight must be >= 0");
    if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
    if (views < 1) throw ConfigError("train: views must be >= 1");
    if (contrastive_weight > 0.0 && (views < 2 || batch_size < 2))
      throw ConfigError("train: the contrastive term needs batch_size >= 2 and views >= 2");
    split.validate();
  }
};

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"learning_rate", c.learning_rate},
                     {"batch_size", c.batch_size},
                     {"epochs", c.epochs},
                     {"contrastive_weight", c.contrastive_weight},
                     {"temperature", c.temperature},
                     {"include_positive_in_denominator", c.include_positive_in_denominator},
                     {"optimizer", nn::to_string(c.optimizer)},
                     {"seed", c.seed},
                     {"split", {c.split.train, c.split.val, c.split.test}},
                     {"views", c.views}};
}

struct TrainRecord {
  std::uint64_t step = 0;
  int epoch = 0;
  double recon = 0.0;
  double contra = 0.0;
  double total = 0.0;
  double learning_rate = 0.0;
  double wall_time = 0.0;  // seconds since fit() started; kept out of the replay log
};

// The only way training code receives audio. It holds noisy recordings and
// nothing else; clean references live in evaluation types this class cannot
// be built from.
class NoisyCorpus {
 public:
  NoisyCorpus() = default;
  explicit NoisyCorpus(std::vector<AudioSegment> noisy) : segs_(std::move(noisy)) {
    for (const auto& s : segs_) validate(s);
  }

  std::size_t size() const { return segs_.size(); }
  bool empty() const { return segs_.empty(); }
  const AudioSegment& operator[](std::size_t i) const { return segs_[i]; }

 private:
  std::vector<AudioSegment> segs_;
};

// Distortion source for training views.
struct Augmenter {
  AugmentPolicy policy;
  const NoiseBank* bank = nullptr;

  // Lung sounds are held out as an unseen noise type.
  void validate() const {
    policy.validate();
    for (const auto& k : policy.sustained_noise.kinds)
      if (k == "lung") throw ConfigError("training augment policy must not use lung noise (held out for evaluation)");
  }
};

struct BatchLoss {
  double recon = 0.0;
  double contra = 0.0;
  double total = 0.0;
};

namespace detail {

inline std::size_t tape_bytes(const UNetTape& t) {
  std::size_t n = static_cast<std::size_t>(t.bott_col.size() + t.bottleneck.size() + t.out_col.size());
  for (const auto& l : t.levels) {
    n += static_cast<std::size_t>(l.conv_col.size() + l.enc_act.size() + l.dropout_mask.size() + l.skip_in.size() +
                                  l.down_col.size() + l.up_in.size() + l.dec_col.size() + l.dec_act.size());
    for (const auto* lt : {&l.lstm.fwd, &l.lstm.bwd})
      n += static_cast<std::size_t>(lt->x.size() + lt->gates.size() + lt->cell.size() + lt->hidden.size());
  }
  return n * sizeof(double);
}

inline constexpr std::size_t kTapeBudgetBytes = std::size_t{512} << 20;

inline Mat row_of(std::span<const double> x, std::size_t len) {
  const auto v = fit_to_length(x, len);
  return Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Index>(len));
}

}  // namespace detail

// Loss (and optionally gradients) for fixed inputs. x1 is m x T (the noisy
// targets); views[j] is m x T, view j of every sample. Dropout masks for
// (sample i, view j) come from derive_seed(dropout_seed, {i, j}).
inline BatchLoss batch_loss(const ModelState& state, const Mat& x1, const std::vector<Mat>& views,
                            const TrainConfig& cfg, Mode mode, std::uint64_t dropout_seed, nn::Grads* grads) {
  const UNet1d net(state.config);
  const auto m = static_cast<std::size_t>(x1.rows());
  const std::size_t k = views.size();
  if (m == 0 || k == 0) throw DataError("batch_loss: empty batch");
  for (const auto& v : views)
    if (v.rows() != x1.rows() || v.cols() != x1.cols()) throw DataError("batch_loss: view shape mismatch");
  const double lambda = cfg.contrastive_weight;
  const bool contrastive_possible = m >= 2 && k >= 2;
  if (lambda > 0.0 && !contrastive_possible)
    throw DataError("contrastive term needs at least 2 samples and 2 views per batch");

  auto dropout_rng = [&](std::size_t i, std::size_t j) { return Rng(derive_seed(dropout_seed, {i, j})); };
  const double norm = 1.0 / static_cast<double>(x1.size() * static_cast<Index>(k));

  std::vector<UNetTape> tapes;
  bool keep_tapes = grads != nullptr;
  std::vector<Mat> outputs(m * k);
  std::vector<std::vector<Vec>> z(m, std::vector<Vec>(k));
  BatchLoss out;
  UNetTape scratch;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      UNetTape& tape = keep_tapes ? tapes.emplace_back() : scratch;
      Rng rng = dropout_rng(i, j);
      const Mat y = net.forward(state.params, views[j].row(static_cast<Index>(i)), mode, &rng, tape);
      z[i][j] = net.project(state.params, tape.bottleneck, tape);
      out.recon += (y - x1.row(static_cast<Index>(i))).squaredNorm() * norm;
      if (grads) outputs[i * k + j] = y;
      if (keep_tapes && tapes.size() == 1 && detail::tape_bytes(tape) * m * k > detail::kTapeBudgetBytes) {
        keep_tapes = false;
        tapes.clear();
      }
    }
  std::optional<ContrastiveResult> cr;
  if (contrastive_possible) {
    cr = contrastive_loss(z, cfg.contrastive(), grads != nullptr && lambda > 0.0);
    out.contra = cr->loss;
  }
  out.total = total_loss(out.recon, out.contra, lambda);
  if (!grads) return out;

  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t a = i * k + j;
      if (!keep_tapes) {
        // Recompute with the same dropout stream instead of holding every tape.
        Rng rng = dropout_rng(i, j);
        net.forward(state.params, views[j].row(static_cast<Index>(i)), mode, &rng, scratch);
        net.project(state.params, scratch.bottleneck, scratch);
      }
      const UNetTape& tape = keep_tapes ? tapes[a] : scratch;
      const Mat dy = 2.0 * norm * (outputs[a] - x1.row(static_cast<Index>(i)));
      Vec dz;
      if (lambda > 0.0) dz = lambda * cr->grad[i][j];
      net.backward(state.params, tape, dy, lambda > 0.0 ? &dz : nullptr, *grads);
    }
  return out;
}

namespace detail {

inline std::string batch_ids(const std::vector<AudioSegment>& batch) {
  std::string s;
  for (const auto& b : batch) {
    if (!s.empty()) s += ", ";
    s += str_cat(b.source_id, "@", format_double(b.offset_s));
  }
  return s;
}

// Targets and augmented views for a batch; views never see anything but x1.
inline std::pair<Mat, std::vector<Mat>> assemble(const std::vector<AudioSegment>& batch, const Augmenter& aug,
                                                 int k, std::size_t len,
                                                 const std::function<std::uint64_t(std::size_t)>& stream) {
  Mat x1(static_cast<Index>(batch.size()), static_cast<Index>(len));
  std::vector<Mat> views(static_cast<std::size_t>(k), Mat(x1.rows(), x1.cols()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].size() > len)
      throw DataError(str_cat("segment '", batch[i].source_id, "' has ", batch[i].size(),
                              " samples, more than model input_len ", len));
    x1.row(static_cast<Index>(i)) = row_of(batch[i].samples, len);
    const auto vs = make_views(batch[i], aug.policy, aug.bank, k, stream(i));
    for (int j = 0; j < k; ++j) views[j].row(static_cast<Index>(i)) = row_of(vs[j].samples, len);
  }
  return {std::move(x1), std::move(views)};
}

}  // namespace detail

// One optimizer update on a batch of noisy segments.
inline TrainRecord train_step(ModelState& state, nn::Optimizer& opt, const std::vector<AudioSegment>& batch,
                              const Augmenter& aug, const TrainConfig& cfg, int epoch = 0) {
  cfg.validate();
  if (static_cast<int>(batch.size()) != cfg.batch_size)
    throw DataError(str_cat("train_step: batch has ", batch.size(), " segments, config expects ", cfg.batch_size));
  const std::uint64_t step = state.step;
  auto [x1, views] = detail::assemble(batch, aug, cfg.views, static_cast<std::size_t>(state.config.input_len),
                                      [&](std::size_t i) { return derive_seed(cfg.seed, {0x5EED, step, i}); });
  nn::Grads g = nn::ParamStore::zeros_like(state.params);
  const auto loss = batch_loss(state, x1, views, cfg, Mode::Training, derive_seed(cfg.seed, {0xD40F, step}), &g);
  if (!std::isfinite(loss.total) || !g.all_finite())
    throw NumericalError(str_cat("non-finite loss at step ", step, " (epoch ", epoch, "; recon ", loss.recon,
                                 ", contrastive ", loss.contra, "); batch: ", detail::batch_ids(batch)));
  opt.learning_rate = cfg.learning_rate;
  opt.step(state.params, g);
  ++state.step;
  TrainRecord r;
  r.step = state.step;
  r.epoch = epoch;
  r.recon = loss.recon;
  r.contra = loss.contra;
  r.total = loss.total;
  r.learning_rate = opt.learning_rate;
  return r;
}

// Mean loss over a corpus in inference mode (dropout off) with fixed,
// per-sample view seeds so epochs are comparable.
inline BatchLoss validation_loss(const ModelState& state, const NoisyCorpus& corpus, const Augmenter& aug,
                                 const TrainConfig& cfg) {
  BatchLoss acc;
  if (corpus.empty()) return {std::nan(""), std::nan(""), std::nan("")};
  const std::size_t bs = static_cast<std::size_t>(std::max(cfg.batch_size, 2));
  std::size_t start = 0;
  while (start < corpus.size()) {
    std::size_t end = std::min(start + bs, corpus.size());
    if (corpus.size() - end == 1) ++end;  // fold a lone straggler into this chunk
    std::vector<AudioSegment> chunk;
    for (std::size_t i = start; i < end; ++i) chunk.push_back(corpus[i]);
    auto [x1, views] = detail::assemble(chunk, aug, cfg.views, static_cast<std::size_t>(state.config.input_len),
                                        [&](std::size_t i) { return derive_seed(cfg.seed, {0x7A11D, start + i}); });
    TrainConfig c = cfg;
    if (chunk.size() < 2) c.contrastive_weight = 0.0;
    const auto l = batch_loss(state, x1, views, c, Mode::Inference, 0, nullptr);
    const double w = static_cast<double>(chunk.size()) / static_cast<double>(corpus.size());
    acc.recon += w * l.recon;
    acc.contra += w * l.contra;
    start = end;
  }
  acc.total = total_loss(acc.recon, acc.contra, cfg.contrastive_weight);
  return acc;
}

struct EpochSummary {
  int epoch = 0;
  std::uint64_t step = 0;
  double train_total = 0.0;  // mean over the epoch's steps
  BatchLoss val;
  bool improved = false;
};

struct FitOptions {
  std::filesystem::path out_dir;  // empty: keep everything in memory
  bool resume = false;
  std::function<void(const EpochSummary&)> on_epoch;
};

struct FitResult {
  ModelState best;
  ModelState last;
  std::vector<TrainRecord> records;
  std::vector<EpochSummary> epochs;
  double best_val = std::numeric_limits<double>::infinity();
};

inline constexpr const char* kTrainLogHeader = "step,epoch,recon_loss,contrastive_loss,total_loss,learning_rate";

namespace detail {

inline checkpoint::Container training_container(const ModelState& s, const nn::Optimizer& opt, int epoch,
                                                double best_val, const TrainConfig& cfg) {
  auto c = to_container(s, {{"epoch", epoch},
                            {"best_val", format_double(best_val)},
                            {"optimizer", {{"kind", nn::to_string(opt.kind)}, {"steps", opt.steps}}},
                            {"train_config", cfg}});
  c.add("adam.m.", opt.m);
  c.add("adam.v.", opt.v);
  return c;
}

// Drops log rows past `last_step` (written after the checkpoint we resume
// from) so the log stays a faithful replay record.
inline void truncate_log(const std::filesystem::path& path, std::uint64_t last_step) {
  std::ifstream in(path);
  if (!in) return;
  std::vector<std::string> keep;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (!keep.empty() && std::stoull(line.substr(0, line.find(','))) > last_step) continue;
    keep.push_back(line);
  }
  in.close();
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : keep) out << l << '\n';
}

}  // namespace detail

// Trains for cfg.epochs over `train`, validating on `val` after every epoch.
// With an output directory: writes train_log.csv (byte-reproducible),
// train_timing.csv (wall clock), epochs.csv, train_config.json, and the
// best.ckpt / last.ckpt checkpoints. Incomplete final batches are dropped.
inline FitResult fit(const NoisyCorpus& train, const NoisyCorpus& val, const ModelConfig& model_cfg,
                     const TrainConfig& cfg, const Augmenter& aug, const FitOptions& opts = {}) {
  namespace fs = std::filesystem;
  cfg.validate();
  model_cfg.validate();
  aug.validate();
  if (train.empty()) throw DataError("empty training split");
  if (train.size() < static_cast<std::size_t>(cfg.batch_size))
    throw DataError(str_cat("training split has ", train.size(), " segments, fewer than one batch of ", cfg.batch_size));

  const bool to_disk = !opts.out_dir.empty();
  const fs::path log_path = opts.out_dir / "train_log.csv";
  const fs::path timing_path = opts.out_dir / "train_timing.csv";
  const fs::path epochs_path = opts.out_dir / "epochs.csv";
  const fs::path last_path = opts.out_dir / "last.ckpt";
  const fs::path best_path = opts.out_dir / "best.ckpt";

  FitResult res;
  ModelState state = init_model(model_cfg, cfg.seed);
  nn::Optimizer opt(cfg.optimizer, cfg.learning_rate, state.params);
  int first_epoch = 0;
  res.best = state;

  if (to_disk) {
    std::error_code ec;
    fs::create_directories(opts.out_dir, ec);
    if (ec) throw DataError("cannot create output directory '" + opts.out_dir.string() + "': " + ec.message());
  }
  const bool resuming = to_disk && opts.resume && fs::exists(last_path);
  if (resuming) {
    const auto c = checkpoint::read_file(last_path);
    state = model_from_container(c);
    opt.m = c.extract("adam.m.");
    opt.v = c.extract("adam.v.");
    opt.m.check_against(UNet1d(state.config).layout());
    opt.v.check_against(UNet1d(state.config).layout());
    const auto& extra = c.metadata.at("extra");
    opt.steps = extra.at("optimizer").at("steps").get<std::uint64_t>();
    first_epoch = extra.at("epoch").get<int>() + 1;
    res.best_val = std::stod(extra.at("best_val").get<std::string>());
    res.best = fs::exists(best_path) ? load(best_path) : state;
    detail::truncate_log(log_path, state.step);
    detail::truncate_log(timing_path, state.step);
  } else if (to_disk) {
    std::ofstream(log_path, std::ios::trunc) << kTrainLogHeader << '\n';
    std::ofstream(timing_path, std::ios::trunc) << "step,wall_time_s\n";
    std::ofstream(epochs_path, std::ios::trunc) << "epoch,step,train_total,val_recon,val_contrastive,val_total,best\n";
    std::ofstream side(opts.out_dir / "train_config.json", std::ios::trunc);
    side << nlohmann::json{{"model", model_cfg}, {"train", cfg}, {"resolved_seed", cfg.seed}}.dump(2) << '\n';
  }

  std::ofstream log, timing, epochs_log;
  if (to_disk) {
    log.open(log_path, std::ios::app);
    timing.open(timing_path, std::ios::app);
    epochs_log.open(epochs_path, std::ios::app);
    if (!log || !timing || !epochs_log) throw DataError("cannot open training logs in '" + opts.out_dir.string() + "'");
  }

  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = first_epoch; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng(derive_seed(cfg.seed, {0xE90C, static_cast<std::uint64_t>(epoch)})).shuffle(order);

    double sum_total = 0.0;
    std::size_t n_steps = 0;
    for (std::size_t start = 0; start + bs <= order.size(); start += bs) {
      std::vector<AudioSegment> batch;
      for (std::size_t i = start; i < start + bs; ++i) batch.push_back(train[order[i]]);
      auto rec = train_step(state, opt, batch, aug, cfg, epoch);
      rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      sum_total += rec.total;
      ++n_steps;
      if (to_disk) {
        log << rec.step << ',' << rec.epoch << ',' << format_double(rec.recon) << ',' << format_double(rec.contra)
            << ',' << format_double(rec.total) << ',' << format_double(rec.learning_rate) << '\n';
        timing << rec.step << ',' << format_double(rec.wall_time) << '\n';
      }
      res.records.push_back(rec);
    }

    EpochSummary es;
    es.epoch = epoch;
    es.step = state.step;
    es.train_total = n_steps ? sum_total / static_cast<double>(n_steps) : std::nan("");
    // No val split: fall back to the training corpus so best-checkpointing still works.
    es.val = val.empty() ? validation_loss(state, train, aug, cfg) : validation_loss(state, val, aug, cfg);
    if (!std::isfinite(es.val.total))
      throw NumericalError(str_cat("non-finite validation loss after epoch ", epoch));
    es.improved = es.val.total < res.best_val;
    if (es.improved) {
      res.best_val = es.val.total;
      res.best = state;
    }
    if (to_disk) {
      log.flush();
      timing.flush();
      epochs_log << epoch << ',' << es.step << ',' << format_double(es.train_total) << ','
                 << format_double(es.val.recon) << ',' << format_double(es.val.contra) << ','
                 << format_double(es.val.total) << ',' << (es.improved ? 1 : 0) << '\n';
      epochs_log.flush();
      if (es.improved) save(state, best_path);
      checkpoint::write_file(last_path, detail::training_container(state, opt, epoch, res.best_val, cfg));
    }
    res.epochs.push_back(es);
    if (opts.on_epoch) opts.on_epoch(es);
  }
  res.last = state;
  if (to_disk && !fs::exists(best_path)) save(res.best, best_path);
  return res;
}

}  // namespace pcgdn
