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
#include "core/kernels.hpp"
#include "core/ops.hpp"
#include "core/rng.hpp"
#include "support/oracles.hpp"

using hacomp::Array;
using hacomp::Rng;
using hacomp::Tape;
namespace ops = hacomp::ops;
namespace kn = hacomp::kernels;

namespace {

Array RandomArray(Rng* rng, std::vector<int64_t> shape, bool rg = false) {
  std::vector<double> v(static_cast<size_t>(hacomp::NumElements(shape)));
  for (auto& x : v) x = rng->NextUniform(-1, 1);
  return Array::FromVector(std::move(shape), std::move(v), rg);
}

double Dot(const Array& a, const Array& b) {
  double s = 0;
  for (int64_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

}  // namespace

TEST_CASE("centered unit impulse kernel is the identity") {
  Array x = Array::FromVector({1, 3}, {1, 2, 3});
  Array w = Array::FromVector({1, 1, 3}, {0, 1, 0});
  Array b = Array::Zeros({1});
  Array y = ops::Conv1d(nullptr, x, w, b, 1);
  CHECK(y.values() == std::vector<double>{1, 2, 3});
}

TEST_CASE("K=2 stride 2 matches the hand-computed correlation") {
  // No padding here: output picks pairs (1+2, 3+4).
  Array x = Array::FromVector({1, 4}, {1, 2, 3, 4});
  Array w = Array::FromVector({1, 1, 2}, {1, 1});
  Array b = Array::Zeros({1});
  Array y = ops::Conv1d(nullptr, x, w, b, 2);
  REQUIRE(y.size() == 2);
  // Checked against the direct-correlation oracle too.
  auto want = oracles::DirectConv1d({1, 2, 3, 4}, 1, 4, {1, 1}, 1, 2, {0}, 2,
                                    ops::ConvPadLeft(4, 2, 2), 2);
  CHECK(y.values() == want);
  CHECK(y.values() == std::vector<double>{3, 7});
}

TEST_CASE("conv1d forward matches the direct-correlation oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 6; ++trial) {
    const int64_t ci = 1 + static_cast<int64_t>(rng.NextBelow(3));
    const int64_t co = 1 + static_cast<int64_t>(rng.NextBelow(4));
    const int64_t t = 5 + static_cast<int64_t>(rng.NextBelow(12));
    const int64_t k = 1 + static_cast<int64_t>(rng.NextBelow(5));
    const int64_t stride = 1 + static_cast<int64_t>(rng.NextBelow(3));
    Array x = RandomArray(&rng, {ci, t});
    Array w = RandomArray(&rng, {co, ci, k});
    Array b = RandomArray(&rng, {co});
    Array y = ops::Conv1d(nullptr, x, w, b, stride);
    auto want = oracles::DirectConv1d(x.values(), ci, t, w.values(), co, k,
                                      b.values(), stride,
                                      ops::ConvPadLeft(t, k, stride),
                                      ops::ConvOutLen(t, stride));
    REQUIRE(y.values().size() == want.size());
    for (size_t i = 0; i < want.size(); ++i)
      CHECK(y.values()[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("conv1d gradients match finite differences on random 8-sample cases") {
  Rng rng(47);
  std::vector<double> xv(2 * 8), wv(2 * 2 * 3), bv(2);
  for (auto& q : xv) q = rng.NextUniform(-1, 1);
  for (auto& q : wv) q = rng.NextUniform(-1, 1);
  for (auto& q : bv) q = rng.NextUniform(-1, 1);

  Tape tape;
  Array x = Array::FromVector({2, 8}, xv, true);
  Array w = Array::FromVector({2, 2, 3}, wv, true);
  Array b = Array::FromVector({2}, bv, true);
  Array y = ops::SumAll(&tape, ops::Square(&tape, ops::Conv1d(&tape, x, w, b, 2)));
  tape.Backward(y);

  auto eval = [&](const std::vector<double>& xq, const std::vector<double>& wq,
                  const std::vector<double>& bq) {
    auto out = oracles::DirectConv1d(xq, 2, 8, wq, 2, 3, bq, 2,
                                     ops::ConvPadLeft(8, 3, 2), 4);
    double s = 0;
    for (double v : out) s += v * v;
    return s;
  };

  auto fx = [&](const std::vector<double>& q) { return eval(q, wv, bv); };
  auto fw = [&](const std::vector<double>& q) { return eval(xv, q, bv); };
  auto fb = [&](const std::vector<double>& q) { return eval(xv, wv, q); };
  std::vector<size_t> all_x, all_w;
  for (size_t i = 0; i < xv.size(); ++i) all_x.push_back(i);
  for (size_t i = 0; i < wv.size(); ++i) all_w.push_back(i);
  CHECK(oracles::MaxGradRelErr(fx, xv, x.grad(), all_x, 1e-6) < 1e-6);
  CHECK(oracles::MaxGradRelErr(fw, wv, w.grad(), all_w, 1e-6) < 1e-6);
  CHECK(oracles::MaxGradRelErr(fb, bv, b.grad(), {0, 1}, 1e-6) < 1e-6);
}

TEST_CASE("transposed conv: zero input yields broadcast bias") {
  Array x = Array::Zeros({2, 4});
  Array w = Array::FromVector({2, 3, 2}, std::vector<double>(12, 0.5));
  Array b = Array::FromVector({3}, {1.0, -2.0, 0.25});
  Array y = ops::Conv1dTransposed(nullptr, x, w, b, 2);
  REQUIRE(y.shape() == std::vector<int64_t>{3, 8});
  for (int64_t c = 0; c < 3; ++c)
    for (int64_t t = 0; t < 8; ++t) CHECK(y.values()[c * 8 + t] == b.values()[c]);
}

TEST_CASE("transposed conv doubles the length at stride 2") {
  Rng rng(5);
  Array x = RandomArray(&rng, {1, 4});
  Array w = RandomArray(&rng, {1, 1, 32});
  Array b = Array::Zeros({1});
  Array y = ops::Conv1dTransposed(nullptr, x, w, b, 2);
  CHECK(y.shape() == std::vector<int64_t>{1, 8});
}

TEST_CASE("adjoint identity <conv(x), y> == <x, convT(y)>") {
  Rng rng(77);
  for (int trial = 0; trial < 8; ++trial) {
    const int64_t ci = 1 + static_cast<int64_t>(rng.NextBelow(3));
    const int64_t co = 1 + static_cast<int64_t>(rng.NextBelow(3));
    const int64_t stride = 1 + static_cast<int64_t>(rng.NextBelow(2));
    const int64_t t = stride * (3 + static_cast<int64_t>(rng.NextBelow(6)));
    const int64_t k = 1 + static_cast<int64_t>(rng.NextBelow(6));
    Array x = RandomArray(&rng, {ci, t});
    Array w = RandomArray(&rng, {co, ci, k});
    Array zb_co = Array::Zeros({co});
    Array zb_ci = Array::Zeros({ci});
    Array ax = ops::Conv1d(nullptr, x, w, zb_co, stride);
    Array y = RandomArray(&rng, {co, ax.dim(1)});
    Array aty = ops::Conv1dTransposed(nullptr, y, w, zb_ci, stride);
    REQUIRE(aty.shape() == x.shape());
    const double lhs = Dot(ax, y);
    const double rhs = Dot(x, aty);
    CHECK(std::fabs(lhs - rhs) / std::max(1e-12, std::fabs(lhs)) < 1e-10);
  }
}

TEST_CASE("transposed conv gradients match finite differences") {
  Rng rng(99);
  std::vector<double> xv(2 * 4), wv(2 * 2 * 4), bv(2);
  for (auto& q : xv) q = rng.NextUniform(-1, 1);
  for (auto& q : wv) q = rng.NextUniform(-1, 1);
  for (auto& q : bv) q = rng.NextUniform(-1, 1);

  auto loss = [&](const std::vector<double>& xq, const std::vector<double>& wq,
                  const std::vector<double>& bq, Tape* tape, Array* gx,
                  Array* gw, Array* gb) {
    Array x = Array::FromVector({2, 4}, xq, tape != nullptr);
    Array w = Array::FromVector({2, 2, 4}, wq, tape != nullptr);
    Array b = Array::FromVector({2}, bq, tape != nullptr);
    Array y = ops::SumAll(tape, ops::Square(tape, ops::Conv1dTransposed(tape, x, w, b, 2)));
    if (gx) *gx = x;
    if (gw) *gw = w;
    if (gb) *gb = b;
    return y;
  };

  Tape tape;
  Array x, w, b;
  Array y = loss(xv, wv, bv, &tape, &x, &w, &b);
  tape.Backward(y);

  auto fx = [&](const std::vector<double>& q) {
    return loss(q, wv, bv, nullptr, nullptr, nullptr, nullptr).item();
  };
  auto fw = [&](const std::vector<double>& q) {
    return loss(xv, q, bv, nullptr, nullptr, nullptr, nullptr).item();
  };
  auto fb = [&](const std::vector<double>& q) {
    return loss(xv, wv, q, nullptr, nullptr, nullptr, nullptr).item();
  };
  std::vector<size_t> all_x, all_w;
  for (size_t i = 0; i < xv.size(); ++i) all_x.push_back(i);
  for (size_t i = 0; i < wv.size(); ++i) all_w.push_back(i);
  CHECK(oracles::MaxGradRelErr(fx, xv, x.grad(), all_x, 1e-6) < 1e-6);
  CHECK(oracles::MaxGradRelErr(fw, wv, w.grad(), all_w, 1e-6) < 1e-6);
  CHECK(oracles::MaxGradRelErr(fb, bv, b.grad(), {0, 1}, 1e-6) < 1e-6);
}

TEST_CASE("prelu forward and gradients") {
  Array a = Array::FromVector({1}, {0.25});
  Array x = Array::FromVector({1, 2}, {2.0, -2.0});
  Array y = ops::Prelu(nullptr, x, a);
  CHECK(y.values()[0] == 2.0);
  CHECK(y.values()[1] == -0.5);

  // d(out)/d(input) at a negative input equals alpha.
  Tape tape;
  Array xg = Array::FromVector({1, 1}, {-1.0}, true);
  Array ag = Array::FromVector({1}, {0.25}, true);
  Array out = ops::SumAll(&tape, ops::Prelu(&tape, xg, ag));
  tape.Backward(out);
  CHECK(xg.grad()[0] == doctest::Approx(0.25));
  CHECK(ag.grad()[0] == doctest::Approx(-1.0));

  auto f = [](const std::vector<double>& q) {
    return q[0] >= 0 ? q[0] : 0.25 * q[0];
  };
  const double fd = oracles::CentralDiff(f, {-1.0}, 0, 1e-6);
  CHECK(oracles::RelErr(xg.grad()[0], fd) < 1e-6);
}

TEST_CASE("kernel shape mismatch names the offending dimension") {
  Array x = Array::Zeros({3, 8});
  Array w = Array::Zeros({4, 2, 3});
  Array b = Array::Zeros({4});
  CHECK_THROWS_WITH_AS(ops::Conv1d(nullptr, x, w, b, 1),
                       doctest::Contains("input-channel dim"), hacomp::Error);
}

TEST_CASE("parallel and serial conv kernels agree bitwise") {
  Rng rng(13);
  const int64_t ci = 3, co = 5, t = 37, k = 7, stride = 2;
  std::vector<double> x(ci * t), w(co * ci * k), b(co);
  for (auto& q : x) q = rng.NextUniform(-1, 1);
  for (auto& q : w) q = rng.NextUniform(-1, 1);
  for (auto& q : b) q = rng.NextUniform(-1, 1);
  const int64_t to = ops::ConvOutLen(t, stride);
  const int64_t pl = ops::ConvPadLeft(t, k, stride);

  std::vector<double> serial(co * to), parallel(co * to);
  kn::Conv1dForwardSerial(x.data(), ci, t, w.data(), co, k, b.data(), stride,
                          pl, serial.data(), to);
  kn::SetParallel(true);
  kn::Conv1dForward(x.data(), ci, t, w.data(), co, k, b.data(), stride, pl,
                    parallel.data(), to);
  CHECK(serial == parallel);

  std::vector<double> gs(ci * t, 0.0), gp(ci * t, 0.0);
  kn::Conv1dGradInputSerial(serial.data(), co, to, w.data(), ci, k, stride, pl,
                            gs.data(), t, true);
  kn::Conv1dGradInput(serial.data(), co, to, w.data(), ci, k, stride, pl,
                      gp.data(), t, true);
  CHECK(gs == gp);

  std::vector<double> gws(co * ci * k, 0.0), gwp(co * ci * k, 0.0);
  kn::Conv1dGradKernelsSerial(x.data(), ci, t, serial.data(), co, to, k, stride,
                              pl, gws.data());
  kn::Conv1dGradKernels(x.data(), ci, t, serial.data(), co, to, k, stride, pl,
                        gwp.data());
  CHECK(gws == gwp);
}
