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

#include "pcgdn/cli/config.hpp"

using namespace pcgdn;

// Reference settings the defaults must reproduce.
TEST_CASE("segmentation defaults", "[defaults]") {
  const SegmentationParams p;
  CHECK(p.target_rate_hz == 2000);
  CHECK(p.segment_len_s == 1.5);
  CHECK(p.hop_s == 0.08);
  CHECK(p.window_samples() == 3000);
}

TEST_CASE("training defaults", "[defaults]") {
  const TrainConfig t;
  CHECK(t.learning_rate == 0.6e-3);
  CHECK(t.batch_size == 16);
  CHECK(t.epochs == 60);
  CHECK(t.split.train == 0.8);
  CHECK(t.split.val == 0.1);
  CHECK(t.split.test == 0.1);
}

TEST_CASE("evaluation grid defaults", "[defaults]") {
  const eval::NoiseGrid g;
  CHECK(g.kinds == std::vector<std::string>{"white", "pink", "red", "hospital", "lung"});
  CHECK(g.snrs_db == std::vector<double>{0.0, 5.0, 10.0});
  CHECK(g.max_segments == 500);
  CHECK(g.unseen_kinds == std::set<std::string>{"lung"});
}

TEST_CASE("dataset defaults", "[defaults]") {
  const data::DatasetSpec d;
  REQUIRE(d.expected_per_class);
  CHECK(*d.expected_per_class == 200);
  CHECK(kNumClasses == 5);
}

TEST_CASE("run config starts from the same defaults", "[defaults]") {
  const auto c = cli::parse_config("");
  CHECK(c.train.learning_rate == 0.6e-3);
  CHECK(c.segmentation.target_rate_hz == 2000);
  CHECK(c.eval.grid.max_segments == 500);
  for (const auto& k : c.augment.sustained_noise.kinds) CHECK(k != "lung");
}
