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
#include <string>

#include "pcgdn/nn/params.hpp"

namespace pcgdn::nn {

// Single-direction LSTM over a [features x time] sequence. Gate rows are
// stacked as (input, forget, cell, output), each `hidden` tall.
struct Lstm {
  std::string name;
  int wx = -1, wh = -1, b = -1;
  Index in = 0, hidden = 0;
  bool reverse = false;

  struct Tape {
    Mat x;       // input sequence
    Mat gates;   // activated gates [4H x T]
    Mat cell;    // c_t [H x T]
    Mat hidden;  // h_t [H x T]
  };

  Lstm() = default;
  Lstm(ParamLayout& layout, const std::string& n, Index in_dim, Index hidden_dim, bool reversed)
      : name(n), in(in_dim), hidden(hidden_dim), reverse(reversed) {
    wx = layout.add(n + ".wx", 4 * hidden_dim, in_dim);
    wh = layout.add(n + ".wh", 4 * hidden_dim, hidden_dim);
    b = layout.add(n + ".b", 4 * hidden_dim, 1);
  }

  std::size_t param_count() const { return static_cast<std::size_t>(4 * hidden * (in + hidden + 1)); }

  static double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

  Mat forward(const ParamStore& p, const Mat& x, Tape& tape) const {
    const Index t_len = x.cols();
    const Index h = hidden;
    tape.x = x;
    tape.gates = p[wx] * x;
    tape.gates.colwise() += p[b].col(0);
    tape.cell.resize(h, t_len);
    tape.hidden.resize(h, t_len);
    Vec h_prev = Vec::Zero(h);
    Vec c_prev = Vec::Zero(h);
    Vec a(4 * h);
    for (Index s = 0; s < t_len; ++s) {
      const Index t = reverse ? t_len - 1 - s : s;
      a.noalias() = tape.gates.col(t) + p[wh] * h_prev;
      for (Index r = 0; r < h; ++r) {
        a(r) = sigmoid(a(r));
        a(h + r) = sigmoid(a(h + r));
        a(2 * h + r) = std::tanh(a(2 * h + r));
        a(3 * h + r) = sigmoid(a(3 * h + r));
      }
      tape.gates.col(t) = a;
      for (Index r = 0; r < h; ++r) {
        const double c = a(h + r) * c_prev(r) + a(r) * a(2 * h + r);
        tape.cell(r, t) = c;
        tape.hidden(r, t) = a(3 * h + r) * std::tanh(c);
      }
      h_prev = tape.hidden.col(t);
      c_prev = tape.cell.col(t);
    }
    return tape.hidden;
  }

  // Backpropagation through time. Returns d(loss)/d(x).
  Mat backward(const ParamStore& p, const Tape& tape, const Mat& dh_out, Grads& g) const {
    const Index t_len = tape.x.cols();
    const Index h = hidden;
    Mat da(4 * h, t_len);
    Mat h_prev_all = Mat::Zero(h, t_len);  // h_{t-1} in processing order, for dWh
    Vec dh_next = Vec::Zero(h);
    Vec dc_next = Vec::Zero(h);
    for (Index s = t_len - 1; s >= 0; --s) {
      const Index t = reverse ? t_len - 1 - s : s;
      const Index t_prev = reverse ? t + 1 : t - 1;
      const bool has_prev = s > 0;
      const auto gates = tape.gates.col(t);
      for (Index r = 0; r < h; ++r) {
        const double i = gates(r), f = gates(h + r), gg = gates(2 * h + r), o = gates(3 * h + r);
        const double c = tape.cell(r, t);
        const double c_prev = has_prev ? tape.cell(r, t_prev) : 0.0;
        const double tc = std::tanh(c);
        const double dh = dh_out(r, t) + dh_next(r);
        const double d_o = dh * tc;
        const double dc = dc_next(r) + dh * o * (1.0 - tc * tc);
        da(r, t) = dc * gg * i * (1.0 - i);
        da(h + r, t) = dc * c_prev * f * (1.0 - f);
        da(2 * h + r, t) = dc * i * (1.0 - gg * gg);
        da(3 * h + r, t) = d_o * o * (1.0 - o);
        dc_next(r) = dc * f;
      }
      if (has_prev) h_prev_all.col(t) = tape.hidden.col(t_prev);
      dh_next.noalias() = p[wh].transpose() * da.col(t);
    }
    g[wh].noalias() += da * h_prev_all.transpose();
    g[wx].noalias() += da * tape.x.transpose();
    g[b].col(0) += da.rowwise().sum();
    return p[wx].transpose() * da;
  }

  // Fan-in uniform input weights, orthogonal recurrent blocks, forget bias 1.
  void init(ParamStore& p, std::uint64_t seed) const {
    Rng rng_x = param_rng(seed, name + ".wx");
    fill_uniform(p[wx], std::sqrt(3.0 / static_cast<double>(in)), rng_x);
    Rng rng_h = param_rng(seed, name + ".wh");
    for (int gate = 0; gate < 4; ++gate) p[wh].block(gate * hidden, 0, hidden, hidden) = random_orthogonal(hidden, rng_h);
    p[b].setZero();
    p[b].block(hidden, 0, hidden, 1).setOnes();
  }
};

// Forward and reverse LSTMs; output rows are [forward; reverse].
struct BiLstm {
  Lstm fwd, bwd;

  struct Tape {
    Lstm::Tape fwd, bwd;
  };

  BiLstm() = default;
  BiLstm(ParamLayout& layout, const std::string& name, Index in_dim, Index hidden_dim)
      : fwd(layout, name + ".fwd", in_dim, hidden_dim, false), bwd(layout, name + ".bwd", in_dim, hidden_dim, true) {}

  Index out_dim() const { return 2 * fwd.hidden; }
  std::size_t param_count() const { return fwd.param_count() + bwd.param_count(); }

  Mat forward(const ParamStore& p, const Mat& x, Tape& tape) const {
    Mat y(out_dim(), x.cols());
    y.topRows(fwd.hidden) = fwd.forward(p, x, tape.fwd);
    y.bottomRows(bwd.hidden) = bwd.forward(p, x, tape.bwd);
    return y;
  }

  Mat backward(const ParamStore& p, const Tape& tape, const Mat& dy, Grads& g) const {
    Mat dx = fwd.backward(p, tape.fwd, dy.topRows(fwd.hidden), g);
    dx += bwd.backward(p, tape.bwd, dy.bottomRows(bwd.hidden), g);
    return dx;
  }

  void init(ParamStore& p, std::uint64_t seed) const {
    fwd.init(p, seed);
    bwd.init(p, seed);
  }
};

}  // namespace pcgdn::nn
