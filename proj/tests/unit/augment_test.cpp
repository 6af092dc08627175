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

#include "pcgdn/augment.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"

using namespace pcgdn;
using Catch::Matchers::WithinAbs;

namespace {

AugmentPolicy quiet_policy() {
  AugmentPolicy p;
  p.time_mask.probability = 0;
  p.gain_transition.probability = 0;
  p.sustained_noise.probability = 0;
  return p;
}

}  // namespace

TEST_CASE("time mask with count 0 is the identity", "[augment]") {
  auto r = gen::rng_for(30, 0);
  const auto s = gen::segment(gen::gaussian(r, 3000), 2000);
  TimeMaskPolicy p;
  p.count = 0;
  Rng rng(1);
  CHECK(time_mask(s, p, rng).samples == s.samples);
}

TEST_CASE("time mask zeroes one bounded run", "[augment]") {
  std::vector<double> ones(3000, 1.0);
  TimeMaskPolicy p;
  p.count = 1;
  p.max_fraction = 0.1;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto out = time_mask(gen::segment(ones, 2000), p, rng).samples;
    std::size_t runs = 0, zeros = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i] == 0.0) {
        ++zeros;
        if (i == 0 || out[i - 1] != 0.0) ++runs;
      }
    }
    CHECK(runs == 1);
    CHECK(zeros <= 300);
  }
}

TEST_CASE("time mask never adds energy", "[augment][property]") {
  for (int c = 0; c < gen::kCases; ++c) {
    auto r = gen::rng_for(31, c);
    const auto s = gen::segment(gen::gaussian(r, static_cast<std::size_t>(r.uniform_int(10, 3000))), 2000);
    TimeMaskPolicy p;
    p.count = static_cast<int>(r.uniform_int(0, 5));
    p.max_fraction = r.uniform(0.01, 0.1);
    const auto out = time_mask(s, p, r);
    CHECK(out.size() == s.size());
    CHECK(energy(out.samples) <= energy(s.samples));
  }
}

TEST_CASE("gain transition closed forms", "[augment]") {
  auto r = gen::rng_for(32, 0);
  const auto s = gen::segment(gen::gaussian(r, 2000), 2000);
  GainTransitionPolicy p;
  p.min_db = p.max_db = 0.0;
  Rng rng(4);
  CHECK(gain_transition(s, p, rng).samples == s.samples);
  p.min_db = p.max_db = -6.0;
  const auto out = gain_transition(s, p, rng);
  CHECK_THAT(rms(out.samples) / rms(s.samples), WithinAbs(std::pow(10.0, -6.0 / 20.0), 1e-12));
  p.min_db = 1;
  p.max_db = 0;
  CHECK_THROWS_AS(gain_transition(s, p, rng), ConfigError);
}

TEST_CASE("gain transition stays under the max gain bound", "[augment][property]") {
  for (int c = 0; c < gen::kCases; ++c) {
    auto r = gen::rng_for(33, c);
    const auto s = gen::segment(gen::gaussian(r, static_cast<std::size_t>(r.uniform_int(2, 3000))), 2000);
    GainTransitionPolicy p;
    p.min_db = r.uniform(-20, 5);
    p.max_db = p.min_db + r.uniform(0, 15);
    p.min_duration_s = r.uniform(0, 1);
    const auto out = gain_transition(s, p, r);
    CHECK(all_finite(out.samples));
    CHECK(peak(out.samples) <= std::pow(10.0, p.max_db / 20.0) * peak(s.samples) * (1 + 1e-12));
  }
}

TEST_CASE("make_views with a degenerate policy copies the input", "[augment]") {
  auto r = gen::rng_for(34, 0);
  const auto s = gen::segment(gen::gaussian(r, 500), 2000);
  const auto v = make_views(s, quiet_policy(), nullptr, 2, 5);
  REQUIRE(v.size() == 2);
  CHECK(v[0].samples == s.samples);
  CHECK(v[1].samples == s.samples);
  CHECK_THROWS_AS(make_views(s, quiet_policy(), nullptr, 0), ConfigError);
}

TEST_CASE("white-noise views sit at the requested SNR and differ", "[augment]") {
  auto r = gen::rng_for(35, 0);
  const auto s = gen::segment(gen::gaussian(r, 3000), 2000);
  auto p = quiet_policy();
  p.seed = 77;
  p.sustained_noise = {{"white"}, 5.0, 5.0, 1.0, 1.0, 1.0};
  const auto v = make_views(s, p, nullptr, 2, 1);
  CHECK_THAT(oracle::snr_db(s.samples, v[0].samples), WithinAbs(5.0, 0.05));
  CHECK_THAT(oracle::snr_db(s.samples, v[1].samples), WithinAbs(5.0, 0.05));
  CHECK(v[0].samples != v[1].samples);
  const auto again = make_views(s, p, nullptr, 2, 1);
  CHECK(again[0].samples == v[0].samples);
  CHECK(again[1].samples == v[1].samples);
}

TEST_CASE("views keep length and rate under random policies", "[augment][property]") {
  for (int c = 0; c < 50; ++c) {
    auto r = gen::rng_for(36, c);
    const auto s = gen::segment(gen::gaussian(r, static_cast<std::size_t>(r.uniform_int(200, 3000))), 2000);
    AugmentPolicy p;
    p.seed = static_cast<std::uint64_t>(c);
    p.sustained_noise.kinds = {"white", "pink", "red"};
    p.time_mask.probability = r.uniform();
    p.gain_transition.probability = r.uniform();
    for (const auto& v : make_views(s, p, nullptr, 3, 2)) {
      CHECK(v.size() == s.size());
      CHECK(v.sample_rate_hz == s.sample_rate_hz);
      CHECK(all_finite(v.samples));
    }
  }
}

TEST_CASE("burst noise additive part hits its SNR", "[augment][property]") {
  for (int c = 0; c < 50; ++c) {
    auto r = gen::rng_for(37, c);
    const auto s = gen::segment(gen::gaussian(r, 2000), 2000);
    SustainedNoisePolicy p;
    p.kinds = {"white", "pink", "red"};
    p.snr_low_db = -5;
    p.snr_high_db = 15;
    Rng probe(static_cast<std::uint64_t>(c)), run(static_cast<std::uint64_t>(c));
    probe.uniform_int(0, 2);
    const double snr = probe.uniform(p.snr_low_db, p.snr_high_db);
    const auto out = sustained_noise(s, p, nullptr, run);
    CHECK_THAT(oracle::snr_db(s.samples, out.samples), WithinAbs(snr, 0.05));
  }
}

TEST_CASE("augment policy validation", "[augment]") {
  AugmentPolicy p;
  CHECK_NOTHROW(p.validate());
  p.time_mask.count = 6;
  p.time_mask.max_fraction = 0.1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.sustained_noise.snr_low_db = 11;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.gain_transition.probability = 1.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
