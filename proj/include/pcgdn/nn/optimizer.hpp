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
#include <string>

#include "pcgdn/common.hpp"
#include "pcgdn/nn/params.hpp"

namespace pcgdn::nn {

enum class OptimizerKind { Adam, Sgd };

inline std::string to_string(OptimizerKind k) { return k == OptimizerKind::Adam ? "adam" : "sgd"; }

inline OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "adam") return OptimizerKind::Adam;
  if (s == "sgd") return OptimizerKind::Sgd;
  throw ConfigError("unknown optimizer '" + s + "' (expected adam or sgd)");
}

// First-order optimizer state. Moments are kept per tensor so they can be
// checkpointed next to the parameters.
struct Optimizer {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 0.6e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t steps = 0;
  ParamStore m, v;

  Optimizer() = default;
  Optimizer(OptimizerKind k, double lr, const ParamStore& params)
      : kind(k), learning_rate(lr), m(ParamStore::zeros_like(params)), v(ParamStore::zeros_like(params)) {}

  void step(ParamStore& params, const Grads& grads) {
    ++steps;
    if (kind == OptimizerKind::Sgd) {
      params.add_scaled(grads, -learning_rate);
      return;
    }
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(steps));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(steps));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& mi = m.values[i];
      auto& vi = v.values[i];
      const auto& gi = grads.values[i];
      mi = beta1 * mi + (1.0 - beta1) * gi;
      vi = beta2 * vi + (1.0 - beta2) * gi.cwiseProduct(gi);
      params.values[i].array() -=
          learning_rate * (mi.array() / c1) / ((vi.array() / c2).sqrt() + epsilon);
    }
  }
};

}  // namespace pcgdn::nn
