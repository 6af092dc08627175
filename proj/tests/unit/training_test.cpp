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

#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <type_traits>

#include "pcgdn/eval/report.hpp"
#include "pcgdn/losses.hpp"
#include "pcgdn/training.hpp"
#include "support/fixtures.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"

using namespace pcgdn;
namespace fs = std::filesystem;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

// Training code cannot be handed clean references.
static_assert(!std::is_constructible_v<NoisyCorpus, eval::CleanSegments>);
static_assert(!std::is_convertible_v<std::vector<AudioSegment>, NoisyCorpus>);
static_assert(!std::is_constructible_v<eval::CleanSegments, NoisyCorpus>);

namespace {

Mat random_mat(Index r, Index c, std::uint64_t seed) {
  Rng g(seed);
  Mat m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = g.normal();
  return m;
}

std::vector<std::vector<Vec>> random_z(Rng& r, std::size_t m, std::size_t k, Index dim) {
  std::vector<std::vector<Vec>> z(m, std::vector<Vec>(k));
  for (auto& views : z)
    for (auto& v : views) {
      v.resize(dim);
      for (Index d = 0; d < dim; ++d) v(d) = r.normal();
    }
  return z;
}

ModelConfig tiny() {
  ModelConfig c;
  c.levels = 2;
  c.base_channels = 4;
  c.kernel_size = 5;
  c.input_len = 64;
  c.projection_hidden = 8;
  c.projection_dim = 4;
  return c;
}

Augmenter white_views(double snr = 5.0) {
  Augmenter a;
  a.policy.sustained_noise.kinds = {"white"};
  a.policy.sustained_noise.snr_low_db = a.policy.sustained_noise.snr_high_db = snr;
  a.policy.time_mask.probability = 0;
  a.policy.gain_transition.probability = 0;
  return a;
}

std::vector<AudioSegment> noisy_corpus(int n, std::size_t len = 64, std::uint64_t seed = 1) {
  std::vector<AudioSegment> out;
  for (int i = 0; i < n; ++i) {
    auto r = gen::rng_for(seed, i);
    auto s = gen::segment(gen::band_limited(r, len, 2000, 300), 2000, "seg" + std::to_string(i));
    for (auto& v : s.samples) v += 0.2 * r.normal();
    out.push_back(normalize(s));
  }
  return out;
}

}  // namespace

TEST_CASE("recon loss examples", "[losses]") {
  const Mat x = random_mat(3, 10, 1);
  CHECK(recon_loss(x, x) == 0.0);
  CHECK_THAT(recon_loss((x.array() + 0.5).matrix(), x), WithinAbs(0.25, 1e-12));
  const Mat y = random_mat(3, 10, 2);
  CHECK_THAT(recon_loss(y, x), WithinAbs(oracle::mse(y, x), 1e-9));
  CHECK_THROWS_AS(recon_loss(y, random_mat(3, 9, 1)), DataError);
}

TEST_CASE("contrastive loss hand cases", "[losses]") {
  const Vec e0 = Vec::Unit(2, 0), e1 = Vec::Unit(2, 1);
  CHECK_THAT(contrastive_loss({{e0, e0}, {e1, e1}}, {1.0, false}, false).loss, WithinAbs(-1.0 + std::log(2.0), 1e-12));
  // All identical, 3 samples x 2 views: each anchor has 4 negatives.
  const Vec v = Vec::Constant(3, 0.7);
  CHECK_THAT(contrastive_loss({{v, v}, {v, v}, {v, v}}, {1.0, false}, false).loss, WithinAbs(std::log(4.0), 1e-12));
}

TEST_CASE("contrastive loss errors", "[losses]") {
  const Vec v = Vec::Ones(3);
  CHECK_THROWS_AS(contrastive_loss({{v, v}}, {}, false), DataError);
  CHECK_THROWS_AS(contrastive_loss({{v}, {v}}, {}, false), DataError);
  CHECK_THROWS_AS(contrastive_loss({{v, v}, {v, v}}, {0.0, false}, false), ConfigError);
  CHECK_THROWS_AS(contrastive_loss({{v, v}, {v, Vec::Zero(3)}}, {}, false), NumericalError);
}

TEST_CASE("contrastive loss matches pair enumeration", "[losses][property]") {
  for (int c = 0; c < gen::kCases; ++c) {
    auto r = gen::rng_for(50, c);
    const auto m = static_cast<std::size_t>(r.uniform_int(2, 8));
    const auto k = static_cast<std::size_t>(r.uniform_int(2, 3));
    const double tau = r.uniform(0.05, 2.0);
    const bool pos = r.bernoulli(0.5);
    const auto z = random_z(r, m, k, static_cast<Index>(r.uniform_int(2, 12)));
    CHECK_THAT(contrastive_loss(z, {tau, pos}, false).loss, WithinAbs(oracle::contrastive(z, tau, pos), 1e-6));
  }
}

TEST_CASE("contrastive loss is invariant to embedding scale", "[losses][property]") {
  for (int c = 0; c < 30; ++c) {
    auto r = gen::rng_for(51, c);
    auto z = random_z(r, 4, 2, 5);
    const double base = contrastive_loss(z, {0.5, false}, false).loss;
    for (auto& views : z)
      for (auto& v : views) v *= r.uniform(0.01, 100.0);
    CHECK_THAT(contrastive_loss(z, {0.5, false}, false).loss, WithinAbs(base, 1e-9));
  }
}

TEST_CASE("contrastive gradient matches finite differences", "[losses]") {
  auto r = gen::rng_for(52, 0);
  auto z = random_z(r, 4, 2, 5);
  for (bool pos : {false, true}) {
    const auto res = contrastive_loss(z, {0.3, pos}, true);
    for (std::size_t i = 0; i < z.size(); ++i)
      for (std::size_t j = 0; j < 2; ++j) {
        const auto fd = oracle::central_differences(z[i][j].data(), 5, [&] {
          return contrastive_loss(z, {0.3, pos}, false).loss;
        });
        for (Index d = 0; d < 5; ++d)
          CHECK(oracle::relative_error(fd[static_cast<std::size_t>(d)], res.grad[i][j](d), 1e-4) < 1e-5);
      }
  }
}

TEST_CASE("total loss is linear in lambda", "[losses]") {
  CHECK(total_loss(1.0, 2.0, 0.5) == 2.0);
  CHECK(total_loss(0.3, 9.0, 0.0) == 0.3);
  for (int c = 0; c < 20; ++c) {
    auto r = gen::rng_for(53, c);
    const double a = r.uniform(0, 5), b = r.uniform(-3, 3), l1 = r.uniform(0, 2), l2 = r.uniform(0, 2);
    CHECK_THAT(total_loss(a, b, l1) - total_loss(a, b, l2), WithinAbs((l1 - l2) * b, 1e-12));
  }
}

TEST_CASE("batch loss combines both views against x1", "[training]") {
  const auto s = init_model(tiny(), 1);
  TrainConfig tc;
  tc.contrastive_weight = 0.3;
  const Mat x1 = random_mat(3, 64, 1);
  const std::vector<Mat> views = {random_mat(3, 64, 2), random_mat(3, 64, 3)};
  const auto l = batch_loss(s, x1, views, tc, Mode::Inference, 0, nullptr);
  const Mat y0 = forward(s, views[0]).denoised, y1 = forward(s, views[1]).denoised;
  CHECK_THAT(l.recon, WithinAbs((oracle::mse(y0, x1) + oracle::mse(y1, x1)) / 2, 1e-12));
  std::vector<std::vector<Vec>> z(3);
  const auto e0 = project(s, forward(s, views[0]).bottlenecks), e1 = project(s, forward(s, views[1]).bottlenecks);
  for (std::size_t i = 0; i < 3; ++i) z[i] = {e0[i].vector, e1[i].vector};
  CHECK_THAT(l.contra, WithinAbs(oracle::contrastive(z, 0.5), 1e-9));
  CHECK_THAT(l.total, WithinAbs(l.recon + 0.3 * l.contra, 1e-9));
}

TEST_CASE("train_step overfits a fixed batch", "[training]") {
  auto state = init_model(tiny(), 2);
  TrainConfig tc;
  tc.contrastive_weight = 0.0;
  tc.batch_size = 4;
  tc.learning_rate = 3e-3;
  nn::Optimizer opt(tc.optimizer, tc.learning_rate, state.params);
  const auto batch = noisy_corpus(4);
  const auto aug = white_views();
  std::vector<double> losses;
  for (int i = 0; i < 50; ++i) losses.push_back(train_step(state, opt, batch, aug, tc).recon);
  auto avg = [&](std::size_t from) {
    double s = 0;
    for (std::size_t i = from; i < from + 10; ++i) s += losses[i];
    return s / 10;
  };
  for (std::size_t from = 10; from + 10 <= losses.size(); from += 10) CHECK(avg(from) < avg(from - 10));
  CHECK(state.step == 50);
}

TEST_CASE("train_step is deterministic and validates its batch", "[training]") {
  TrainConfig tc;
  tc.batch_size = 4;
  const auto batch = noisy_corpus(4);
  const auto aug = white_views();
  auto run = [&] {
    auto s = init_model(tiny(), 3);
    nn::Optimizer opt(tc.optimizer, tc.learning_rate, s.params);
    const auto rec = train_step(s, opt, batch, aug, tc);
    return std::make_pair(s, rec);
  };
  const auto [a, ra] = run();
  const auto [b, rb] = run();
  CHECK(ra.total == rb.total);
  CHECK_THAT(ra.total, WithinAbs(ra.recon + tc.contrastive_weight * ra.contra, 1e-9));
  for (std::size_t i = 0; i < a.params.size(); ++i) CHECK(a.params.values[i] == b.params.values[i]);

  auto s = init_model(tiny(), 3);
  nn::Optimizer opt(tc.optimizer, tc.learning_rate, s.params);
  CHECK_THROWS_AS(train_step(s, opt, noisy_corpus(3), aug, tc), DataError);
}

TEST_CASE("non-finite loss names the batch", "[training]") {
  TrainConfig tc;
  tc.batch_size = 2;
  auto s = init_model(tiny(), 3);
  for (std::size_t i = 0; i < s.params.size(); ++i)
    if (s.params.names[i] == "out.conv.b") s.params.values[i](0, 0) = std::numeric_limits<double>::infinity();
  nn::Optimizer opt(tc.optimizer, tc.learning_rate, s.params);
  CHECK_THROWS_WITH(train_step(s, opt, noisy_corpus(2), white_views(), tc),
                    Catch::Matchers::ContainsSubstring("seg0") && Catch::Matchers::ContainsSubstring("seg1"));
}

TEST_CASE("validation runs with dropout off", "[training]") {
  auto cfg = tiny();
  cfg.dropout_rate = 0.5;
  const auto s = init_model(cfg, 4);
  TrainConfig tc;
  tc.batch_size = 4;
  const NoisyCorpus corpus(noisy_corpus(8));
  const auto a = validation_loss(s, corpus, white_views(), tc), b = validation_loss(s, corpus, white_views(), tc);
  CHECK(a.total == b.total);
  CHECK(std::isfinite(a.total));
}

TEST_CASE("training augmenter refuses held-out lung noise", "[training]") {
  Augmenter a = white_views();
  a.policy.sustained_noise.kinds = {"white", "lung"};
  CHECK_THROWS_AS(a.validate(), ConfigError);
}

TEST_CASE("train config validation", "[training]") {
  TrainConfig t;
  CHECK_NOTHROW(t.validate());
  t.temperature = 0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t = {};
  t.contrastive_weight = -1;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t = {};
  t.split = {0.5, 0.3, 0.3};
  CHECK_THROWS_AS(t.validate(), ConfigError);
}

TEST_CASE("fit writes checkpoints and logs", "[training]") {
  const auto dir = fixture::scratch_dir("fit");
  TrainConfig tc;
  tc.epochs = 5;
  tc.batch_size = 16;
  FitOptions fo;
  fo.out_dir = dir;
  const auto res = fit(NoisyCorpus(noisy_corpus(64)), NoisyCorpus(noisy_corpus(8, 64, 9)), tiny(), tc, white_views(), fo);
  CHECK(res.records.size() == 20);
  CHECK(res.epochs.size() == 5);
  CHECK(fs::exists(dir / "best.ckpt"));
  CHECK(fs::exists(dir / "last.ckpt"));
  CHECK(fs::exists(dir / "train_config.json"));
  CHECK(load(dir / "last.ckpt").step == 20);
  for (std::size_t i = 0; i < res.records.size(); ++i) {
    CHECK(res.records[i].step == i + 1);
    CHECK(std::isfinite(res.records[i].total));
  }
  CHECK_THROWS_AS(fit(NoisyCorpus(), NoisyCorpus(), tiny(), tc, white_views()), DataError);
}

TEST_CASE("resumed training matches an uninterrupted run", "[training]") {
  const auto a = fixture::scratch_dir("fit_full"), b = fixture::scratch_dir("fit_resumed");
  const NoisyCorpus train(noisy_corpus(40)), val(noisy_corpus(8, 64, 9));
  TrainConfig tc;
  tc.batch_size = 8;
  tc.epochs = 4;
  FitOptions fo;
  fo.out_dir = a;
  fit(train, val, tiny(), tc, white_views(), fo);

  fo.out_dir = b;
  tc.epochs = 2;
  fit(train, val, tiny(), tc, white_views(), fo);
  // Rows appended after the last checkpoint must be discarded on resume.
  std::ofstream(b / "train_log.csv", std::ios::app) << "999,3,1,1,1,1\n";
  tc.epochs = 4;
  fo.resume = true;
  std::vector<std::uint64_t> steps;
  fo.on_epoch = [&](const EpochSummary& e) { steps.push_back(e.step); };
  const auto res = fit(train, val, tiny(), tc, white_views(), fo);
  REQUIRE(steps.size() == 2);
  CHECK(steps[0] == 15);
  CHECK(steps[1] == 20);
  CHECK(fixture::slurp(a / "train_log.csv") == fixture::slurp(b / "train_log.csv"));
  CHECK(fixture::slurp(a / "epochs.csv") == fixture::slurp(b / "epochs.csv"));
  const auto full = load(a / "last.ckpt");
  for (std::size_t i = 0; i < full.params.size(); ++i) CHECK(full.params.values[i] == res.last.params.values[i]);
}

TEST_CASE("same seed gives the same loss curve", "[training]") {
  const NoisyCorpus train(noisy_corpus(32));
  TrainConfig tc;
  tc.batch_size = 8;
  tc.epochs = 2;
  const auto a = fit(train, NoisyCorpus(), tiny(), tc, white_views());
  const auto b = fit(train, NoisyCorpus(), tiny(), tc, white_views());
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(a.records[i].total == b.records[i].total);
  tc.seed = 1;
  CHECK(fit(train, NoisyCorpus(), tiny(), tc, white_views()).records[0].total != a.records[0].total);
}
