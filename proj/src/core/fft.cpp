// Copyright 2026 The Hacomp Authors. All Rights Reserved.
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

#include "core/fft.hpp"

#include <cmath>

#include "core/common.hpp"

namespace hacomp {
namespace fft {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool IsPow2(int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

int64_t NextPow2(int64_t n) {
  int64_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Iterative radix-2 Cooley-Tukey; sign = -1 forward, +1 inverse (unscaled).
void Radix2(std::vector<Complex>* data, int sign) {
  const int64_t n = static_cast<int64_t>(data->size());
  std::vector<Complex>& a = *data;
  // Bit reversal permutation.
  for (int64_t i = 1, j = 0; i < n; ++i) {
    int64_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int64_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * kTwoPi / static_cast<double>(len);
    const Complex wl(std::cos(ang), std::sin(ang));
    for (int64_t i = 0; i < n; i += len) {
      Complex w(1.0, 0.0);
      for (int64_t k = 0; k < len / 2; ++k) {
        const Complex u = a[i + k];
        const Complex v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

// Bluestein chirp-z transform for arbitrary N via power-of-two convolution.
void Bluestein(std::vector<Complex>* data, int sign) {
  const int64_t n = static_cast<int64_t>(data->size());
  const int64_t m = NextPow2(2 * n - 1);
  std::vector<Complex> chirp(n);
  for (int64_t k = 0; k < n; ++k) {
    // Phase k^2/2; k*k can exceed 2^53 for huge n, not a concern at our sizes,
    // but keep it exact with fmod on the angle index.
    const double phase =
        sign * kTwoPi * 0.5 * std::fmod(static_cast<double>(k) * k, 2.0 * n) / n;
    chirp[k] = Complex(std::cos(phase), std::sin(phase));
  }
  std::vector<Complex> av(m, Complex(0, 0));
  std::vector<Complex> bv(m, Complex(0, 0));
  for (int64_t k = 0; k < n; ++k) av[k] = (*data)[k] * chirp[k];
  bv[0] = std::conj(chirp[0]);
  for (int64_t k = 1; k < n; ++k) bv[k] = bv[m - k] = std::conj(chirp[k]);
  Radix2(&av, -1);
  Radix2(&bv, -1);
  for (int64_t k = 0; k < m; ++k) av[k] *= bv[k];
  Radix2(&av, +1);
  const double scale = 1.0 / static_cast<double>(m);
  for (int64_t k = 0; k < n; ++k) (*data)[k] = av[k] * scale * chirp[k];
}

void Transform(std::vector<Complex>* data, int sign) {
  const int64_t n = static_cast<int64_t>(data->size());
  Check(n >= 1, "fft: empty input");
  if (n == 1) return;
  if (IsPow2(n)) {
    Radix2(data, sign);
  } else {
    Bluestein(data, sign);
  }
}

}  // namespace

void Forward(std::vector<Complex>* data) { Transform(data, -1); }
void Inverse(std::vector<Complex>* data) { Transform(data, +1); }

std::vector<Complex> ForwardReal(const double* x, int64_t n) {
  std::vector<Complex> data(n);
  for (int64_t i = 0; i < n; ++i) data[i] = Complex(x[i], 0.0);
  Forward(&data);
  return data;
}

}  // namespace fft
}  // namespace hacomp
