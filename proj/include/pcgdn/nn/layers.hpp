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
#include <cmath>
#include <string>

#include "pcgdn/nn/params.hpp"

// Feature maps are [channels x time] matrices. Every layer's forward takes a
// const ParamStore and returns whatever backward needs; backward accumulates
// into a Grads store and returns the input gradient.
namespace pcgdn::nn {

inline constexpr double kLeakySlope = 0.01;

inline Mat leaky_relu(const Mat& x) { return x.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; }); }

// Gradient through leaky ReLU given its output (sign is preserved).
inline Mat leaky_relu_backward(const Mat& y, const Mat& dy) {
  return dy.binaryExpr(y, [](double g, double v) { return v > 0.0 ? g : kLeakySlope * g; });
}

// Stride-1 convolution with zero "same" padding; kernel must be odd.
struct Conv1d {
  std::string name;
  int w = -1, b = -1;
  Index in = 0, out = 0, kernel = 1;

  Conv1d() = default;
  Conv1d(ParamLayout& layout, const std::string& n, Index in_ch, Index out_ch, Index k)
      : name(n), in(in_ch), out(out_ch), kernel(k) {
    w = layout.add(n + ".w", out_ch, in_ch * k);
    b = layout.add(n + ".b", out_ch, 1);
  }

  std::size_t param_count() const { return static_cast<std::size_t>(out * in * kernel + out); }

  Mat im2col(const Mat& x) const {
    const Index t_len = x.cols();
    if (kernel == 1) return x;
    Mat col = Mat::Zero(in * kernel, t_len);
    const Index half = kernel / 2;
    for (Index i = 0; i < in; ++i)
      for (Index k = 0; k < kernel; ++k) {
        const Index shift = k - half;
        const Index t0 = std::max<Index>(0, -shift);
        const Index t1 = std::min<Index>(t_len, t_len - shift);
        if (t1 > t0) col.row(i * kernel + k).segment(t0, t1 - t0) = x.row(i).segment(t0 + shift, t1 - t0);
      }
    return col;
  }

  Mat col2im(const Mat& col) const {
    const Index t_len = col.cols();
    if (kernel == 1) return col;
    Mat x = Mat::Zero(in, t_len);
    const Index half = kernel / 2;
    for (Index i = 0; i < in; ++i)
      for (Index k = 0; k < kernel; ++k) {
        const Index shift = k - half;
        const Index t0 = std::max<Index>(0, -shift);
        const Index t1 = std::min<Index>(t_len, t_len - shift);
        if (t1 > t0) x.row(i).segment(t0 + shift, t1 - t0) += col.row(i * kernel + k).segment(t0, t1 - t0);
      }
    return x;
  }

  // Returns y; stores the unfolded input in `col` for backward.
  Mat forward(const ParamStore& p, const Mat& x, Mat& col) const {
    col = im2col(x);
    Mat y = p[w] * col;
    y.colwise() += p[b].col(0);
    return y;
  }

  Mat backward(const ParamStore& p, const Mat& col, const Mat& dy, Grads& g) const {
    g[w].noalias() += dy * col.transpose();
    g[b].col(0) += dy.rowwise().sum();
    return col2im(p[w].transpose() * dy);
  }

  void init(ParamStore& p, std::uint64_t seed, double gain = 6.0) const {
    Rng rng = param_rng(seed, name);
    fill_uniform(p[w], std::sqrt(gain / static_cast<double>(in * kernel)), rng);
    p[b].setZero();
  }
};

// Kernel-2, stride-2 convolution: halves the time axis exactly.
struct DownConv {
  std::string name;
  int w = -1, b = -1;
  Index in = 0, out = 0;

  DownConv() = default;
  DownConv(ParamLayout& layout, const std::string& n, Index in_ch, Index out_ch)
      : name(n), in(in_ch), out(out_ch) {
    w = layout.add(n + ".w", out_ch, in_ch * 2);
    b = layout.add(n + ".b", out_ch, 1);
  }

  std::size_t param_count() const { return static_cast<std::size_t>(out * in * 2 + out); }

  Mat forward(const ParamStore& p, const Mat& x, Mat& col) const {
    const Index half_len = x.cols() / 2;
    col.resize(in * 2, half_len);
    for (Index i = 0; i < in; ++i)
      for (Index t = 0; t < half_len; ++t) {
        col(i * 2, t) = x(i, 2 * t);
        col(i * 2 + 1, t) = x(i, 2 * t + 1);
      }
    Mat y = p[w] * col;
    y.colwise() += p[b].col(0);
    return y;
  }

  Mat backward(const ParamStore& p, const Mat& col, const Mat& dy, Grads& g) const {
    g[w].noalias() += dy * col.transpose();
    g[b].col(0) += dy.rowwise().sum();
    const Mat dcol = p[w].transpose() * dy;
    Mat dx(in, dcol.cols() * 2);
    for (Index i = 0; i < in; ++i)
      for (Index t = 0; t < dcol.cols(); ++t) {
        dx(i, 2 * t) = dcol(i * 2, t);
        dx(i, 2 * t + 1) = dcol(i * 2 + 1, t);
      }
    return dx;
  }

  void init(ParamStore& p, std::uint64_t seed) const {
    Rng rng = param_rng(seed, name);
    fill_uniform(p[w], std::sqrt(3.0 / static_cast<double>(in * 2)), rng);
    p[b].setZero();
  }
};

// Kernel-2, stride-2 transposed convolution: doubles the time axis exactly.
// Weight rows are (out_channel * 2 + tap).
struct UpConv {
  std::string name;
  int w = -1, b = -1;
  Index in = 0, out = 0;

  UpConv() = default;
  UpConv(ParamLayout& layout, const std::string& n, Index in_ch, Index out_ch)
      : name(n), in(in_ch), out(out_ch) {
    w = layout.add(n + ".w", out_ch * 2, in_ch);
    b = layout.add(n + ".b", out_ch, 1);
  }

  std::size_t param_count() const { return static_cast<std::size_t>(out * 2 * in + out); }

  Mat forward(const ParamStore& p, const Mat& x) const {
    const Mat z = p[w] * x;
    Mat y(out, x.cols() * 2);
    for (Index o = 0; o < out; ++o)
      for (Index t = 0; t < x.cols(); ++t) {
        y(o, 2 * t) = z(o * 2, t) + p[b](o, 0);
        y(o, 2 * t + 1) = z(o * 2 + 1, t) + p[b](o, 0);
      }
    return y;
  }

  Mat backward(const ParamStore& p, const Mat& x, const Mat& dy, Grads& g) const {
    Mat dz(out * 2, x.cols());
    for (Index o = 0; o < out; ++o)
      for (Index t = 0; t < x.cols(); ++t) {
        dz(o * 2, t) = dy(o, 2 * t);
        dz(o * 2 + 1, t) = dy(o, 2 * t + 1);
      }
    g[w].noalias() += dz * x.transpose();
    g[b].col(0) += dy.rowwise().sum();
    return p[w].transpose() * dz;
  }

  void init(ParamStore& p, std::uint64_t seed) const {
    Rng rng = param_rng(seed, name);
    fill_uniform(p[w], std::sqrt(3.0 / static_cast<double>(in)), rng);
    p[b].setZero();
  }
};

// Fully connected layer over column vectors (or column batches).
struct Dense {
  std::string name;
  int w = -1, b = -1;
  Index in = 0, out = 0;

  Dense() = default;
  Dense(ParamLayout& layout, const std::string& n, Index in_dim, Index out_dim)
      : name(n), in(in_dim), out(out_dim) {
    w = layout.add(n + ".w", out_dim, in_dim);
    b = layout.add(n + ".b", out_dim, 1);
  }

  std::size_t param_count() const { return static_cast<std::size_t>(out * in + out); }

  Mat forward(const ParamStore& p, const Mat& x) const {
    Mat y = p[w] * x;
    y.colwise() += p[b].col(0);
    return y;
  }

  Mat backward(const ParamStore& p, const Mat& x, const Mat& dy, Grads& g) const {
    g[w].noalias() += dy * x.transpose();
    g[b].col(0) += dy.rowwise().sum();
    return p[w].transpose() * dy;
  }

  void init(ParamStore& p, std::uint64_t seed, double gain = 6.0) const {
    Rng rng = param_rng(seed, name);
    fill_uniform(p[w], std::sqrt(gain / static_cast<double>(in)), rng);
    p[b].setZero();
  }
};

// Inverted dropout mask: zeros with probability `rate`, survivors scaled by
// 1 / (1 - rate).
inline Mat dropout_mask(Index rows, Index cols, double rate, Rng& rng) {
  Mat m(rows, cols);
  const double keep = 1.0 / (1.0 - rate);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.uniform() < rate ? 0.0 : keep;
  return m;
}

}  // namespace pcgdn::nn
