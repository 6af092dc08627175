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
#include <numbers>

#include "pcgdn/eval/classifier.hpp"
#include "pcgdn/eval/embed.hpp"
#include "pcgdn/eval/metrics.hpp"
#include "pcgdn/eval/report.hpp"
#include "pcgdn/eval/spectrogram.hpp"
#include "pcgdn/eval/tsne.hpp"
#include "support/fixtures.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"

using namespace pcgdn;
namespace fs = std::filesystem;
using namespace pcgdn::eval;
using Catch::Matchers::WithinAbs;

namespace {

// Class c is a tone at a class-specific frequency with random phase and level.
AudioSegment tone_example(int c, Rng& r, std::size_t n = 256) {
  const double hz[] = {40, 110, 230, 400, 640};
  std::vector<double> x(n);
  const double ph = r.uniform(0, 6.28), a = r.uniform(0.5, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = a * std::sin(2 * std::numbers::pi * hz[c] * static_cast<double>(i) / 2000 + ph) + 0.05 * r.normal();
  auto s = gen::segment(std::move(x), 2000, "tone" + std::to_string(c));
  s.label = kAllClasses[static_cast<std::size_t>(c)];
  return s;
}

std::vector<AudioSegment> tone_set(std::size_t per_class, std::uint64_t seed) {
  Rng r(seed);
  std::vector<AudioSegment> out;
  for (std::size_t k = 0; k < per_class; ++k)
    for (int c = 0; c < kNumClasses; ++c) out.push_back(tone_example(c, r));
  return out;
}

ClassifierConfig toy_classifier() {
  ClassifierConfig c;
  c.input_len = 256;
  c.blocks = 3;
  c.base_channels = 4;
  c.lstm_hidden = 8;
  c.learning_rate = 5e-3;
  c.epochs = 15;
  c.batch_size = 10;
  c.seed = 2;
  return c;
}

const ClassifierState& toy_state() {
  static const ClassifierState st = train_classifier(tone_set(20, 1), toy_classifier());
  return st;
}

CleanSegments clean_tones(std::size_t per_class, std::uint64_t seed) { return {tone_set(per_class, seed)}; }

// Hands back the clean references regardless of input, as an upper bound.
Denoiser oracle_denoiser(const CleanSegments& clean) {
  return [clean](const std::vector<std::vector<double>>& xs) {
    REQUIRE(xs.size() == clean.segments.size());
    std::vector<std::vector<double>> out;
    for (const auto& s : clean.segments) out.push_back(s.samples);
    return out;
  };
}

}  // namespace

TEST_CASE("metrics match per-class counting", "[evaluation][property]") {
  for (int c = 0; c < gen::kCases; ++c) {
    auto r = gen::rng_for(60, c);
    const auto n = static_cast<std::size_t>(r.uniform_int(1, 200));
    std::vector<int> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<int>(r.uniform_int(0, 4));
      pred[i] = r.bernoulli(0.6) ? truth[i] : static_cast<int>(r.uniform_int(0, 4));
    }
    const auto m = classification_metrics(confusion(truth, pred, 5));
    double hits = 0;
    for (int k = 0; k < 5; ++k) {
      double tp = 0, fn = 0, fp = 0, tn = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool t = truth[i] == k, p = pred[i] == k;
        tp += t && p;
        fn += t && !p;
        fp += !t && p;
        tn += !t && !p;
      }
      const auto& got = m.per_class[static_cast<std::size_t>(k)];
      if (tp + fn > 0) CHECK_THAT(got.se, WithinAbs(tp / (tp + fn), 1e-12));
      else CHECK(std::isnan(got.se));
      if (tn + fp > 0) CHECK_THAT(got.sp, WithinAbs(tn / (tn + fp), 1e-12));
      CHECK_THAT(got.acc, WithinAbs((tp + tn) / static_cast<double>(n), 1e-12));
      hits += tp;
    }
    CHECK_THAT(m.overall_accuracy, WithinAbs(hits / static_cast<double>(n), 1e-12));
  }
}

TEST_CASE("metrics on a hand-made confusion matrix", "[evaluation]") {
  // 2 classes: 8 of 10 class-0 right, 6 of 10 class-1 right.
  std::vector<int> truth, pred;
  for (int i = 0; i < 10; ++i) truth.push_back(0), pred.push_back(i < 8 ? 0 : 1);
  for (int i = 0; i < 10; ++i) truth.push_back(1), pred.push_back(i < 6 ? 1 : 0);
  const auto m = classification_metrics(confusion(truth, pred, 2));
  CHECK_THAT(m.per_class[0].se, WithinAbs(0.8, 1e-12));
  CHECK_THAT(m.per_class[0].sp, WithinAbs(0.6, 1e-12));
  CHECK_THAT(m.macro.se, WithinAbs(0.7, 1e-12));
  CHECK_THAT(m.overall_accuracy, WithinAbs(0.7, 1e-12));
  CHECK_THROWS_AS(confusion({0}, {5}, 2), DataError);
  CHECK_THROWS_AS(classification_metrics(ConfusionMatrix(2)), DataError);
}

TEST_CASE("silhouette matches the brute-force definition", "[evaluation][property]") {
  for (int c = 0; c < 50; ++c) {
    auto r = gen::rng_for(61, c);
    const auto n = static_cast<std::size_t>(r.uniform_int(4, 40));
    const int k = static_cast<int>(r.uniform_int(2, 4));
    std::vector<Vec> pts;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
      const int l = i < static_cast<std::size_t>(k) ? static_cast<int>(i) : static_cast<int>(r.uniform_int(0, k - 1));
      Vec v(3);
      for (int d = 0; d < 3; ++d) v(d) = r.normal() + 2.0 * l;
      pts.push_back(v);
      labels.push_back(l);
    }
    if (static_cast<std::size_t>(k) >= n) continue;
    CHECK_THAT(silhouette(pts, labels), WithinAbs(oracle::silhouette(pts, labels), 1e-12));
  }
  const std::vector<Vec> two = {Vec::Zero(2), Vec::Ones(2)};
  CHECK_THROWS_AS(silhouette(two, {0, 1}), DataError);
}

TEST_CASE("spectrogram of a tone peaks at its frequency", "[evaluation]") {
  const auto seg = gen::segment(gen::sine(100, 3000, 2000), 2000);
  const auto s = spectrogram(seg);
  CHECK(s.window == 128);
  CHECK(s.hop == 16);
  CHECK(s.db.cols() == static_cast<Index>(frame_count(3000, 128, 16)));
  CHECK(s.db.cols() == 180);
  Index bin = 0;
  s.db.col(90).maxCoeff(&bin);
  CHECK(std::abs(s.bin_hz(bin) - 100.0) <= s.bin_hz(1));
}

TEST_CASE("spectrogram of silence sits at the floor", "[evaluation]") {
  const auto s = spectrogram(gen::segment(std::vector<double>(500, 0.0), 2000));
  CHECK(s.db.minCoeff() == -200.0);
  CHECK(s.db.maxCoeff() == -200.0);
  CHECK_THROWS_AS(spectrogram(gen::segment(std::vector<double>(100, 0.0), 2000)), DataError);
}

TEST_CASE("identity denoiser reproduces the input SNR", "[evaluation]") {
  const auto clean = clean_tones(4, 3);
  const auto bank = fixture::ambient_bank(2000);
  const auto rows = eval_snr(identity_denoiser(), clean, NoiseGrid{}, &bank);
  REQUIRE(rows.size() == 15);
  for (const auto& r : rows) {
    CHECK_THAT(r.mean_output_snr_db, WithinAbs(r.input_snr_db, 0.1));
    CHECK(r.n == 20);
    CHECK(r.unseen_by_training == (r.kind == "lung"));
  }
  NoiseGrid no_files;
  no_files.kinds = {"hospital"};
  CHECK_THROWS_AS(eval_snr(identity_denoiser(), clean, no_files), DataError);
}

TEST_CASE("exact reconstruction scores infinite SNR", "[evaluation]") {
  const auto clean = clean_tones(2, 4);
  NoiseGrid g;
  g.kinds = {"white", "red"};
  for (const auto& r : eval_snr(oracle_denoiser(clean), clean, g)) CHECK(std::isinf(r.mean_output_snr_db));
  CHECK_THROWS_AS(eval_snr(identity_denoiser(), CleanSegments{}, g), DataError);
}

TEST_CASE("evaluation subsets are seeded and capped", "[evaluation]") {
  const auto a = subsample(100, 10, 1), b = subsample(100, 10, 1);
  CHECK(a == b);
  CHECK(a.size() == 10);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(subsample(5, 10, 1).size() == 5);
}

TEST_CASE("classifier probabilities sum to one", "[evaluation][classifier]") {
  Rng r(9);
  for (int c = 0; c < kNumClasses; ++c) {
    const auto p = predict_proba(toy_state(), tone_example(c, r).samples);
    double sum = 0;
    for (double v : p) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK_THAT(sum, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("classifier separates a toy problem", "[evaluation][classifier]") {
  const auto test = tone_set(20, 77);
  int right = 0;
  for (const auto& s : test) right += predict(toy_state(), s.samples) == class_index(*s.label);
  CHECK(static_cast<double>(right) / static_cast<double>(test.size()) >= 0.95);
}

TEST_CASE("classifier needs every class and survives a round trip", "[evaluation][classifier]") {
  auto missing = tone_set(2, 1);
  std::erase_if(missing, [](const AudioSegment& s) { return *s.label == PcgClass::MVP; });
  CHECK_THROWS_WITH(train_classifier(missing, toy_classifier()), Catch::Matchers::ContainsSubstring("MVP"));

  const auto dir = fixture::scratch_dir("clf");
  save_classifier(toy_state(), dir / "c.ckpt");
  const auto back = load_classifier(dir / "c.ckpt");
  const auto x = tone_set(1, 5)[2].samples;
  CHECK(predict_proba(back, x) == predict_proba(toy_state(), x));
}

TEST_CASE("degradation study brackets", "[evaluation][classifier]") {
  const auto clean = clean_tones(6, 11);
  const auto noise = noise_spec_from_label("white", 0.0, 3);
  const auto ident = degradation_study(toy_state(), identity_denoiser(), clean, noise);
  REQUIRE(ident.size() == 3);
  CHECK(ident[0].condition == "clean");
  CHECK(ident[1].condition == "noisy");
  CHECK(ident[2].condition == "denoised");
  CHECK(ident[2].confusion.counts == ident[1].confusion.counts);
  const auto best = degradation_study(toy_state(), oracle_denoiser(clean), clean, noise);
  CHECK(best[2].confusion.counts == best[0].confusion.counts);
  CHECK(best[1].confusion.counts == ident[1].confusion.counts);
}

TEST_CASE("t-SNE is seeded and separates distant blobs", "[evaluation][tsne]") {
  Rng r(3);
  std::vector<Vec> pts;
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) {
    Vec v(5);
    for (int d = 0; d < 5; ++d) v(d) = r.normal() + (i % 2 ? 10.0 : 0.0);
    pts.push_back(v);
    labels.push_back(i % 2);
  }
  TsneParams p;
  p.perplexity = 5;
  p.iterations = 1000;
  p.seed = 4;
  const Mat a = tsne(pts, p), b = tsne(pts, p);
  CHECK(a == b);
  CHECK(a.rows() == 30);
  CHECK(a.cols() == 2);
  std::vector<Vec> y;
  for (Index i = 0; i < a.rows(); ++i) y.push_back(a.row(i).transpose());
  CHECK(silhouette(y, labels) > 0.5);

  p.perplexity = 10;
  CHECK_THROWS_AS(tsne(pts, p), DataError);
  p.perplexity = 0;
  CHECK_THROWS_AS(tsne(pts, p), ConfigError);
}

TEST_CASE("embedding export writes one row per segment", "[evaluation]") {
  ModelConfig mc;
  mc.levels = 2;
  mc.base_channels = 4;
  mc.kernel_size = 5;
  mc.input_len = 256;
  mc.projection_hidden = 8;
  mc.projection_dim = 4;
  const auto state = init_model(mc, 1);
  const auto segs = tone_set(3, 8);
  TsneParams p;
  p.perplexity = 3;
  p.iterations = 100;
  const auto e = export_embeddings(state, segs, p);
  CHECK(e.coords.rows() == 15);
  const auto dir = fixture::scratch_dir("export");
  write_csv(e, dir / "e.csv");
  std::ifstream in(dir / "e.csv");
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 17);
  CHECK(lines[0].rfind("# tsne perplexity=3", 0) == 0);
  CHECK(lines[1] == "source_id,offset_s,label,tsne_x,tsne_y,z0,z1,z2,z3");
  CHECK(lines[2].rfind("tone0,0,N,", 0) == 0);
}
