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

#include "pcgdn/checkpoint.hpp"
#include "pcgdn/denoise.hpp"
#include "pcgdn/model.hpp"
#include "support/fixtures.hpp"
#include "support/gen.hpp"

using namespace pcgdn;
namespace fs = std::filesystem;
using Catch::Matchers::WithinAbs;

namespace {

ModelConfig small(int levels = 2, int len = 64) {
  ModelConfig c;
  c.levels = levels;
  c.base_channels = 4;
  c.kernel_size = 5;
  c.input_len = len;
  c.projection_hidden = 8;
  c.projection_dim = 4;
  return c;
}

Mat random_batch(int rows, int cols, std::uint64_t seed) {
  Rng r(seed);
  Mat x(rows, cols);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = r.normal();
  return x;
}

}  // namespace

TEST_CASE("init is deterministic per seed", "[model]") {
  const auto a = init_model(small(), 1), b = init_model(small(), 1), c = init_model(small(), 2);
  REQUIRE(a.params.size() == b.params.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    CHECK(a.params.values[i] == b.params.values[i]);
    differs = differs || a.params.values[i] != c.params.values[i];
  }
  CHECK(differs);
}

TEST_CASE("config rejects lengths not divisible by 2^levels", "[model]") {
  ModelConfig c;
  c.input_len = 3000;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(init_model(c, 1), ConfigError);
  c.input_len = 3008;
  CHECK_NOTHROW(c.validate());
  c.kernel_size = 4;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.kernel_size = 15;
  c.dropout_rate = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("forward keeps shape and is deterministic", "[model]") {
  for (int levels : {1, 2, 3}) {
    for (int len : {64, 128, 96}) {
      auto cfg = small(levels, len);
      const auto s = init_model(cfg, 3);
      const Mat x = random_batch(3, len, 5);
      const auto a = forward(s, x), b = forward(s, x);
      CHECK(a.denoised.rows() == 3);
      CHECK(a.denoised.cols() == len);
      CHECK(a.denoised == b.denoised);
      CHECK(a.denoised.allFinite());
      REQUIRE(a.bottlenecks.size() == 3);
      CHECK(a.bottlenecks[0].cols() == len >> levels);
      CHECK(a.bottlenecks[0].rows() == cfg.bottleneck_channels());
    }
  }
}

TEST_CASE("forward on zero input with zero biases", "[model]") {
  auto s = init_model(small(), 3);
  for (std::size_t i = 0; i < s.params.size(); ++i)
    if (s.params.names[i].ends_with(".b")) s.params.values[i].setZero();
  const auto y = forward(s, Mat::Zero(2, 64)).denoised;
  CHECK(y.rows() == 2);
  CHECK(y.allFinite());
}

TEST_CASE("forward rejects bad input", "[model]") {
  const auto s = init_model(small(), 3);
  CHECK_THROWS_AS(forward(s, Mat::Zero(1, 63)), DataError);
  Mat x = Mat::Zero(1, 64);
  x(0, 3) = std::nan("");
  CHECK_THROWS_AS(forward(s, x), DataError);
}

TEST_CASE("embeddings are unit norm and deterministic", "[model]") {
  const auto s = init_model(small(), 4);
  const auto f = forward(s, random_batch(4, 64, 9));
  const auto e = project(s, f.bottlenecks), e2 = project(s, f.bottlenecks);
  REQUIRE(e.size() == 4);
  for (std::size_t i = 0; i < e.size(); ++i) {
    CHECK(e[i].vector.size() == 4);
    CHECK_THAT(e[i].vector.norm(), WithinAbs(1.0, 1e-6));
    CHECK(e[i].vector == e2[i].vector);
  }
  const double cs = e[0].vector.dot(e[1].vector);
  CHECK(cs >= -1.0 - 1e-12);
  CHECK(cs <= 1.0 + 1e-12);
}

TEST_CASE("identity skips drop exactly the BiLSTM parameters", "[model]") {
  auto with = small(3, 64);
  auto without = with;
  without.lstm_skips = false;
  const auto a = init_model(with, 1), b = init_model(without, 1);
  std::size_t lstm = 0;
  for (std::size_t i = 0; i < a.params.size(); ++i)
    if (a.params.names[i].find(".lstm.") != std::string::npos) lstm += static_cast<std::size_t>(a.params.values[i].size());
  CHECK(lstm > 0);
  CHECK(a.params.scalar_count() - b.params.scalar_count() == lstm);
  CHECK(forward(b, random_batch(1, 64, 2)).denoised.cols() == 64);
}

TEST_CASE("sum skip merge", "[model]") {
  auto c = small();
  c.skip_merge = SkipMerge::Sum;
  CHECK(forward(init_model(c, 1), random_batch(2, 64, 1)).denoised.cols() == 64);
  c.lstm_hidden_per_direction = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("padding to the model length round trips", "[model]") {
  const std::vector<double> x = {1, 2, 3};
  const auto p = fit_to_length(x, 8);
  CHECK(p == std::vector<double>{0, 0, 1, 2, 3, 0, 0, 0});
  CHECK(unfit_length(p, 3) == x);
  CHECK(fit_to_length(std::vector<double>(3000, 1.0), 3008)[3] == 0.0);
  const auto s = init_model(small(), 1);
  CHECK(denoise_segment(s, std::vector<double>(50, 0.1)).size() == 50);
  CHECK_THROWS_AS(denoise_segment(s, std::vector<double>(65, 0.1)), DataError);
}

TEST_CASE("checkpoint round trip is exact", "[model]") {
  const auto dir = fixture::scratch_dir("ckpt");
  auto s = init_model(small(), 11);
  s.step = 42;
  save(s, dir / "m.ckpt");
  const auto t = load(dir / "m.ckpt");
  CHECK(t.seed == 11);
  CHECK(t.step == 42);
  CHECK(t.config.input_len == 64);
  for (std::size_t i = 0; i < s.params.size(); ++i) CHECK(t.params.values[i] == s.params.values[i]);
  const Mat x = random_batch(2, 64, 3);
  CHECK(forward(s, x).denoised == forward(t, x).denoised);
}

TEST_CASE("corrupt checkpoints are rejected", "[model]") {
  const auto dir = fixture::scratch_dir("ckpt_bad");
  save(init_model(small(), 1), dir / "m.ckpt");
  auto bytes = fixture::slurp(dir / "m.ckpt");
  auto write = [&](const std::vector<std::uint8_t>& b) {
    std::ofstream(dir / "x.ckpt", std::ios::binary).write(reinterpret_cast<const char*>(b.data()),
                                                          static_cast<std::streamsize>(b.size()));
  };
  write({bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(bytes.size() / 2)});
  CHECK_THROWS_WITH(load(dir / "x.ckpt"), Catch::Matchers::ContainsSubstring("corrupt checkpoint"));
  auto flipped = bytes;
  flipped[flipped.size() - 20] ^= 0x55;
  write(flipped);
  CHECK_THROWS_WITH(load(dir / "x.ckpt"), Catch::Matchers::ContainsSubstring("checksum"));
  auto version = bytes;
  version[8] = 9;
  write(version);
  CHECK_THROWS_WITH(load(dir / "x.ckpt"), Catch::Matchers::ContainsSubstring("version"));
  CHECK_THROWS_AS(load(dir / "missing.ckpt"), DataError);
}

TEST_CASE("whole-recording denoising keeps length and level", "[model][denoise]") {
  const auto s = init_model(small(2, 64), 5);
  auto r = gen::rng_for(40, 0);
  for (std::size_t n : {10u, 64u, 65u, 200u, 1001u}) {
    const auto x = gen::gaussian(r, n);
    const auto y = denoise_signal(s, x);
    CHECK(y.size() == n);
    CHECK(denoise_signal(s, x) == y);
    CHECK(all_finite(y));
  }
  CHECK(denoise_signal(s, std::vector<double>(300, 0.0)) == std::vector<double>(300, 0.0));
}

TEST_CASE("triangular windows at half overlap sum to one", "[denoise]") {
  for (std::size_t len : {4u, 64u, 3008u}) {
    const auto w = triangular_window(len);
    for (std::size_t i = 0; i < len / 2; ++i) CHECK_THAT(w[i] + w[i + len / 2], WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("denoise_recording resamples foreign rates", "[denoise]") {
  const auto s = init_model(small(2, 64), 5);
  auto seg = gen::segment(gen::sine(60, 4410, 44100, 0.3), 44100);
  Diagnostics d;
  const auto out = denoise_recording(s, seg, 2000, &d);
  CHECK(out.size() == seg.size());
  CHECK(out.sample_rate_hz == 44100);
  CHECK(d.warnings.size() == 1);
}
