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
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace pcgdn {

using Complex = std::complex<double>;

// Full complex spectrum of a real sequence (length n, any n).
inline std::vector<Complex> fft(std::span<const double> x) {
  Eigen::FFT<double> engine;
  std::vector<double> in(x.begin(), x.end());
  std::vector<Complex> out;
  engine.fwd(out, in);
  // Eigen returns the half spectrum for real input unless asked otherwise.
  if (out.size() != in.size()) {
    const std::size_t n = in.size();
    out.resize(n);
    for (std::size_t k = n / 2 + 1; k < n; ++k) out[k] = std::conj(out[n - k]);
  }
  return out;
}

// Inverse of fft() for Hermitian spectra; returns the real part.
inline std::vector<double> ifft_real(const std::vector<Complex>& spectrum) {
  Eigen::FFT<double> engine;
  std::vector<Complex> time;
  engine.inv(time, spectrum);
  std::vector<double> out(time.size());
  for (std::size_t i = 0; i < time.size(); ++i) out[i] = time[i].real();
  return out;
}

// Periodic Hann taper.
inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace pcgdn
