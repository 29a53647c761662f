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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/array.hpp"
#include "core/fft.hpp"
#include "core/ops.hpp"
#include "core/rng.hpp"
#include "support/oracles.hpp"

using hacomp::Array;
using hacomp::Rng;
using hacomp::Tape;
namespace ops = hacomp::ops;

TEST_CASE("fft matches the dense DFT oracle, power-of-two and not") {
  Rng rng(3);
  for (int64_t n : {64, 48, 96}) {
    std::vector<double> x(static_cast<size_t>(n));
    for (auto& v : x) v = rng.NextUniform(-1, 1);
    auto got = hacomp::fft::ForwardReal(x.data(), n);
    auto want = oracles::DenseDft(x);
    for (int64_t k = 0; k < n; ++k) {
      CHECK(std::abs(got[k] - want[k]) < 1e-9);
    }
  }
}

TEST_CASE("fft_mag of a constant signal concentrates in the DC bin") {
  const double c = 0.7;
  Array x = Array::Full({16}, c);
  Array m = ops::FftMag(nullptr, x);
  REQUIRE(m.size() == 9);
  CHECK(m.values()[0] == doctest::Approx(c * 16).epsilon(1e-12));
  for (int64_t k = 1; k < 9; ++k) CHECK(m.values()[k] < 1e-10);
}

TEST_CASE("fft_mag matches dense DFT magnitudes on random length-64 signals") {
  Rng rng(9);
  std::vector<double> x(64);
  for (auto& v : x) v = rng.NextUniform(-1, 1);
  Array m = ops::FftMag(nullptr, Array::FromVector({64}, x));
  auto want = oracles::DenseDft(x);
  for (int64_t k = 0; k <= 32; ++k)
    CHECK(std::fabs(m.values()[k] - std::abs(want[k])) < 1e-10);
}

TEST_CASE("fft bin k maps to k*fs/T hertz") {
  // A 1 kHz sinusoid sampled at 8 kHz over 64 samples lands at bin 8.
  const double fs = 8000.0;
  const int64_t n = 64;
  std::vector<double> x(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i)
    x[i] = std::sin(2.0 * M_PI * 1000.0 * static_cast<double>(i) / fs);
  Array m = ops::FftMag(nullptr, Array::FromVector({n}, x));
  const int64_t bin = static_cast<int64_t>(1000.0 * n / fs);
  CHECK(bin == 8);
  int64_t peak = 0;
  for (int64_t k = 1; k <= n / 2; ++k)
    if (m.values()[k] > m.values()[peak]) peak = k;
  CHECK(peak == bin);
}

TEST_CASE("fft_mag gradient matches finite differences away from zero bins") {
  Rng rng(12);
  std::vector<double> xv(32);
  for (auto& v : xv) v = rng.NextUniform(-1, 1);
  Tape tape;
  Array x = Array::FromVector({32}, xv, true);
  Array loss = ops::MeanAll(&tape, ops::FftMag(&tape, x));
  tape.Backward(loss);
  auto f = [](const std::vector<double>& q) {
    auto spec = oracles::DenseDft(q);
    double s = 0;
    for (size_t k = 0; k <= q.size() / 2; ++k) s += std::abs(spec[k]);
    return s / (q.size() / 2 + 1);
  };
  std::vector<size_t> coords{0, 5, 13, 31};
  CHECK(oracles::MaxGradRelErr(f, xv, x.grad(), coords, 1e-6) < 1e-6);
}

TEST_CASE("stft of the zero signal is all-zero magnitudes") {
  Array x = Array::Zeros({256});
  Array s = ops::StftMag(nullptr, x, 64, 32, false, false);
  for (double v : s.values()) CHECK(v == 0.0);
}

TEST_CASE("stft peak of an exact-bin sinusoid matches the dense DFT oracle") {
  // Window length 64, bin 8: the Hann-windowed peak is N/4 at the bin.
  const int64_t n = 64;
  std::vector<double> x(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i)
    x[i] = std::cos(2.0 * M_PI * 8.0 * static_cast<double>(i) / n);
  Array s = ops::StftMag(nullptr, Array::FromVector({n}, x), n, n / 2, false, false);
  REQUIRE(s.shape() == std::vector<int64_t>{1, n / 2 + 1});

  // Oracle: dense DFT of the Hann-windowed frame.
  std::vector<double> windowed(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i)
    windowed[i] = x[i] * (0.5 - 0.5 * std::cos(2.0 * M_PI * i / n));
  auto want = oracles::DenseDft(windowed);
  for (int64_t k = 0; k <= n / 2; ++k)
    CHECK(std::fabs(s.values()[k] - std::abs(want[k])) < 1e-9);
  CHECK(s.values()[8] == doctest::Approx(n / 4.0).epsilon(1e-9));
}

TEST_CASE("stft frame count and per-row layout") {
  Array x = Array::Zeros({3, 512});
  Array s = ops::StftMag(nullptr, x, 128, 64, false, false);
  const int64_t frames = ops::StftFrameCount(512, 128, 64);
  CHECK(frames == 7);
  CHECK(s.shape() == std::vector<int64_t>{3, frames * 65});
}

TEST_CASE("stft magnitude gradient matches finite differences") {
  Rng rng(21);
  std::vector<double> xv(96);
  for (auto& v : xv) v = rng.NextUniform(-1, 1);
  Tape tape;
  Array x = Array::FromVector({96}, xv, true);
  Array loss = ops::MeanAll(&tape, ops::StftMag(&tape, x, 32, 16, false, false));
  tape.Backward(loss);
  auto f = [](const std::vector<double>& q) {
    const int64_t win = 32, hop = 16;
    const int64_t frames = 1 + (static_cast<int64_t>(q.size()) - win) / hop;
    double s = 0;
    for (int64_t fr = 0; fr < frames; ++fr) {
      std::vector<double> frame(win);
      for (int64_t i = 0; i < win; ++i)
        frame[i] = q[fr * hop + i] * (0.5 - 0.5 * std::cos(2.0 * M_PI * i / win));
      auto spec = oracles::DenseDft(frame);
      for (int64_t b = 0; b <= win / 2; ++b) s += std::abs(spec[b]);
    }
    return s / (frames * (win / 2 + 1));
  };
  std::vector<size_t> coords{0, 17, 40, 95};
  CHECK(oracles::MaxGradRelErr(f, xv, x.grad(), coords, 1e-6) < 1e-5);
}

TEST_CASE("squared and complex stft gradients match finite differences") {
  Rng rng(33);
  std::vector<double> xv(64);
  for (auto& v : xv) v = rng.NextUniform(-1, 1);

  for (bool complex_out : {false, true}) {
    const bool squared = !complex_out;
    Tape tape;
    Array x = Array::FromVector({64}, xv, true);
    Array s = ops::StftMag(&tape, x, 32, 16, squared, complex_out);
    // Use a quadratic readout in the complex case so the objective is smooth.
    Array loss = complex_out ? ops::MeanAll(&tape, ops::Square(&tape, s))
                             : ops::MeanAll(&tape, s);
    tape.Backward(loss);
    auto f = [&](const std::vector<double>& q) {
      const int64_t win = 32, hop = 16;
      const int64_t frames = 1 + (static_cast<int64_t>(q.size()) - win) / hop;
      double s2 = 0;
      int64_t count = 0;
      for (int64_t fr = 0; fr < frames; ++fr) {
        std::vector<double> frame(win);
        for (int64_t i = 0; i < win; ++i)
          frame[i] = q[fr * hop + i] * (0.5 - 0.5 * std::cos(2.0 * M_PI * i / win));
        auto spec = oracles::DenseDft(frame);
        for (int64_t b = 0; b <= win / 2; ++b) {
          if (complex_out) {
            s2 += spec[b].real() * spec[b].real() + spec[b].imag() * spec[b].imag();
            count += 2;
          } else {
            s2 += std::norm(spec[b]);
            ++count;
          }
        }
      }
      return s2 / count;
    };
    std::vector<size_t> coords{1, 30, 63};
    CHECK(oracles::MaxGradRelErr(f, xv, x.grad(), coords, 1e-6) < 1e-5);
  }
}

TEST_CASE("stft rejects too-short signals") {
  Array x = Array::Zeros({100});
  CHECK_THROWS_AS(ops::StftMag(nullptr, x, 128, 64, false, false), hacomp::Error);
}

TEST_CASE("biquad and one-pole adjoints pass the dot-product test") {
  Rng rng(8);
  const int64_t t = 40;
  std::vector<double> coeffs{0.2, 0.1, -0.05, -0.6, 0.18};  // one section
  std::vector<double> xv(t), yv(t);
  for (auto& v : xv) v = rng.NextUniform(-1, 1);
  for (auto& v : yv) v = rng.NextUniform(-1, 1);

  Array x = Array::FromVector({t}, xv);
  Array ax = ops::BiquadCascade(nullptr, x, coeffs, 1);
  // <A x, y> vs <x, A^T y> where A^T is realized by the backward pass.
  double lhs = 0;
  for (int64_t i = 0; i < t; ++i) lhs += ax.values()[i] * yv[i];

  Tape tape;
  Array xg = Array::FromVector({t}, xv, true);
  Array out = ops::BiquadCascade(&tape, xg, coeffs, 1);
  // Scalar "loss" = <out, y>.
  Array loss = ops::SumAll(&tape, ops::Mul(&tape, out, Array::FromVector({t}, yv)));
  tape.Backward(loss);
  double rhs = 0;
  for (int64_t i = 0; i < t; ++i) rhs += xv[i] * 0.0 + xg.grad()[i] * xv[i];
  // <x, A^T y> computed from the gradient of <Ax, y> w.r.t. x, which is A^T y.
  double rhs2 = 0;
  for (int64_t i = 0; i < t; ++i) rhs2 += xg.grad()[i] * xv[i];
  (void)rhs;
  CHECK(std::fabs(lhs - rhs2) / std::max(1e-12, std::fabs(lhs)) < 1e-10);

  // One-pole gradient vs finite differences.
  Tape t2;
  Array x2 = Array::FromVector({t}, xv, true);
  Array lp = ops::OnePoleLowpass(&t2, x2, 0.25);
  Array l2 = ops::MeanAll(&t2, ops::Square(&t2, lp));
  t2.Backward(l2);
  auto f = [&](const std::vector<double>& q) {
    double state = 0, s = 0;
    for (int64_t i = 0; i < t; ++i) {
      state += 0.25 * (q[i] - state);
      s += state * state;
    }
    return s / t;
  };
  std::vector<size_t> coords{0, 7, 20, 39};
  CHECK(oracles::MaxGradRelErr(f, xv, x2.grad(), coords, 1e-6) < 1e-6);
}
