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
#include "core/ops.hpp"
#include "core/rng.hpp"
#include "support/oracles.hpp"

using hacomp::Array;
using hacomp::Rng;
using hacomp::Tape;
namespace ops = hacomp::ops;

TEST_CASE("square forward") {
  Array a = Array::FromVector({2}, {-2.0, 3.0});
  Array out = ops::Square(nullptr, a);
  CHECK(out.values()[0] == 4.0);
  CHECK(out.values()[1] == 9.0);
}

TEST_CASE("abs subgradient at zero is zero") {
  Tape tape;
  Array a = Array::FromVector({3}, {-1.0, 0.0, 2.0}, /*requires_grad=*/true);
  Array s = ops::SumAll(&tape, ops::Abs(&tape, a));
  tape.Backward(s);
  CHECK(a.grad()[0] == -1.0);
  CHECK(a.grad()[1] == 0.0);
  CHECK(a.grad()[2] == 1.0);
}

TEST_CASE("mul gradient matches finite differences on random arrays") {
  Rng rng(7);
  std::vector<double> av(16), bv(16);
  for (auto& x : av) x = rng.NextUniform(-2, 2);
  for (auto& x : bv) x = rng.NextUniform(-2, 2);

  Tape tape;
  Array a = Array::FromVector({16}, av, true);
  Array b = Array::FromVector({16}, bv, true);
  Array y = ops::SumAll(&tape, ops::Square(&tape, ops::Mul(&tape, a, b)));
  tape.Backward(y);

  auto f = [&](const std::vector<double>& x) {
    double s = 0;
    for (size_t i = 0; i < x.size(); ++i) s += x[i] * bv[i] * x[i] * bv[i];
    return s;
  };
  double worst = oracles::MaxGradRelErr(f, av, a.grad(),
                                        {0, 3, 7, 11, 15}, 1e-6);
  CHECK(worst < 1e-6);
}

TEST_CASE("reduce sum over axis") {
  // 21 x 4 of ones, summed over rows -> vector of 21s, length 4.
  Array a = Array::Full({21, 4}, 1.0);
  Array s = ops::Reduce(nullptr, a, 0, ops::ReduceKind::kSum);
  REQUIRE(s.size() == 4);
  for (double v : s.values()) CHECK(v == 21.0);
}

TEST_CASE("reduce mean is sum over n exactly") {
  Rng rng(3);
  std::vector<double> v(24);
  for (auto& x : v) x = rng.NextUniform(-5, 5);
  Array a = Array::FromVector({4, 6}, v);
  Array mean = ops::Reduce(nullptr, a, 1, ops::ReduceKind::kMean);
  Array sum = ops::Reduce(nullptr, a, 1, ops::ReduceKind::kSum);
  for (int i = 0; i < 4; ++i) CHECK(mean.values()[i] == sum.values()[i] / 6.0);
}

TEST_CASE("reduce max routes gradient to first maximal element") {
  Tape tape;
  Array a = Array::FromVector({4}, {1.0, 3.0, 3.0, 2.0}, true);
  Array m = ops::Reduce(&tape, a, -1, ops::ReduceKind::kMax);
  CHECK(m.item() == 3.0);
  tape.Backward(m);
  CHECK(a.grad()[0] == 0.0);
  CHECK(a.grad()[1] == 1.0);  // first of the tied maxima
  CHECK(a.grad()[2] == 0.0);
  CHECK(a.grad()[3] == 0.0);
}

TEST_CASE("reduce max gradient matches finite differences off ties") {
  Rng rng(11);
  std::vector<double> v(12);
  for (auto& x : v) x = rng.NextUniform(-1, 1);
  Tape tape;
  Array a = Array::FromVector({12}, v, true);
  Array m = ops::Reduce(&tape, a, -1, ops::ReduceKind::kMax);
  tape.Backward(m);
  auto f = [](const std::vector<double>& x) {
    double best = x[0];
    for (double q : x) best = std::max(best, q);
    return best;
  };
  std::vector<size_t> coords;
  for (size_t i = 0; i < v.size(); ++i) coords.push_back(i);
  CHECK(oracles::MaxGradRelErr(f, v, a.grad(), coords, 1e-7) < 1e-6);
}

TEST_CASE("mae basics") {
  Array x = Array::FromVector({3}, {0.5, -1.0, 2.0});
  CHECK(ops::Mae(nullptr, x, x).item() == 0.0);
  Array a = Array::FromVector({2}, {0.0, 0.0});
  Array b = Array::FromVector({2}, {1.0, 3.0});
  CHECK(ops::Mae(nullptr, a, b).item() == 2.0);
}

TEST_CASE("mae gradient is sign/N elementwise") {
  Rng rng(5);
  std::vector<double> av(10), bv(10);
  for (auto& x : av) x = rng.NextUniform(-1, 1);
  for (auto& x : bv) x = rng.NextUniform(-1, 1);
  Tape tape;
  Array a = Array::FromVector({10}, av, true);
  Array b = Array::FromVector({10}, bv);
  Array loss = ops::Mae(&tape, a, b);
  tape.Backward(loss);
  for (size_t i = 0; i < av.size(); ++i) {
    const double want = (av[i] > bv[i] ? 1.0 : -1.0) / 10.0;
    CHECK(a.grad()[i] == doctest::Approx(want));
  }
  // And against finite differences (all coordinates are off the |.| kink).
  auto f = [&](const std::vector<double>& x) {
    double s = 0;
    for (size_t i = 0; i < x.size(); ++i) s += std::fabs(x[i] - bv[i]);
    return s / 10.0;
  };
  std::vector<size_t> coords{0, 4, 9};
  CHECK(oracles::MaxGradRelErr(f, av, a.grad(), coords, 1e-7) < 1e-6);
}

TEST_CASE("masked mae equals mae over the retained index set") {
  Array a = Array::FromVector({2, 3}, {1, 2, 3, 4, 5, 6});
  Array b = Array::Zeros({2, 3});
  std::vector<double> mask{1, 0, 1, 0, 1, 0};
  const double got = ops::MaskedMae(nullptr, a, b, {}, mask).item();
  CHECK(got == doctest::Approx((1.0 + 3.0 + 5.0) / 3.0));
  // All-zero mask yields 0 by convention.
  std::vector<double> none(6, 0.0);
  CHECK(ops::MaskedMae(nullptr, a, b, {}, none).item() == 0.0);
}

TEST_CASE("backward of sum gives all-ones gradient") {
  Tape tape;
  Array x = Array::FromVector({5}, {1, 2, 3, 4, 5}, true);
  Array y = ops::SumAll(&tape, x);
  tape.Backward(y);
  for (double g : x.grad()) CHECK(g == 1.0);
}

TEST_CASE("disconnected leaf gets zero gradient") {
  Tape tape;
  Array x = Array::FromVector({3}, {1, 2, 3}, true);
  Array unused = Array::FromVector({3}, {9, 9, 9}, true);
  Array y = ops::SumAll(&tape, x);
  tape.Backward(y);
  CHECK_FALSE(unused.has_grad());
  for (double g : unused.grad()) CHECK(g == 0.0);
}

TEST_CASE("repeated backward accumulates") {
  Tape tape;
  Array x = Array::FromVector({2}, {1.0, 2.0}, true);
  Array y = ops::SumAll(&tape, x);
  tape.Backward(y);
  tape.Backward(y);
  for (double g : x.grad()) CHECK(g == 2.0);
}

TEST_CASE("backward over a sum of losses equals sum of per-loss backwards") {
  Rng rng(21);
  std::vector<double> v(8);
  for (auto& x : v) x = rng.NextUniform(-1, 1);

  // Joint graph.
  Tape tape;
  Array x = Array::FromVector({8}, v, true);
  Array l1 = ops::SumAll(&tape, ops::Square(&tape, x));
  Array l2 = ops::MeanAll(&tape, ops::Abs(&tape, x));
  Array total = ops::Add(&tape, l1, l2);
  tape.Backward(total);
  std::vector<double> joint = x.grad();

  // Separate graphs accumulated one after the other.
  Tape t2;
  Array x2 = Array::FromVector({8}, v, true);
  Array m1 = ops::SumAll(&t2, ops::Square(&t2, x2));
  Array m2 = ops::MeanAll(&t2, ops::Abs(&t2, x2));
  t2.Backward(m1);
  t2.Backward(m2);
  for (size_t i = 0; i < joint.size(); ++i)
    CHECK(joint[i] == doctest::Approx(x2.grad()[i]).epsilon(1e-15));
}

TEST_CASE("non-scalar backward is rejected") {
  Tape tape;
  Array x = Array::FromVector({3}, {1, 2, 3}, true);
  Array y = ops::Square(&tape, x);
  CHECK_THROWS_AS(tape.Backward(y), hacomp::Error);
}

TEST_CASE("shape mismatch raises a structured error") {
  Array a = Array::Zeros({3});
  Array b = Array::Zeros({4});
  CHECK_THROWS_WITH_AS(ops::Add(nullptr, a, b),
                       doctest::Contains("shape mismatch"), hacomp::Error);
}

TEST_CASE("smooth relu and sigmoid gradients match finite differences") {
  Rng rng(17);
  std::vector<double> v(10);
  for (auto& x : v) x = rng.NextUniform(-3, 3);
  Tape tape;
  Array x = Array::FromVector({10}, v, true);
  Array y = ops::SumAll(
      &tape, ops::Mul(&tape, ops::Sigmoid(&tape, x), ops::SmoothRelu(&tape, x, 0.1)));
  tape.Backward(y);
  auto f = [](const std::vector<double>& q) {
    double s = 0;
    for (double x : q) {
      const double sig = 1.0 / (1.0 + std::exp(-x));
      s += sig * 0.5 * (x + std::sqrt(x * x + 0.01));
    }
    return s;
  };
  std::vector<size_t> coords{0, 2, 5, 9};
  CHECK(oracles::MaxGradRelErr(f, v, x.grad(), coords, 1e-6) < 1e-6);
}

TEST_CASE("splice routes gradients to patch and base") {
  Tape tape;
  Array base = Array::FromVector({6}, {1, 2, 3, 4, 5, 6}, true);
  Array patch = Array::FromVector({2}, {10, 20}, true);
  Array out = ops::SpliceCols(&tape, base, patch, 2);
  CHECK(out.values() == std::vector<double>{1, 2, 10, 20, 5, 6});
  tape.Backward(ops::SumAll(&tape, out));
  CHECK(base.grad() == std::vector<double>{1, 1, 0, 0, 1, 1});
  CHECK(patch.grad() == std::vector<double>{1, 1});
}

TEST_CASE("single-threaded replay is bitwise reproducible") {
  auto run = [](uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(32);
    for (auto& x : v) x = rng.NextUniform(-1, 1);
    Tape tape;
    Array x = Array::FromVector({32}, v, true);
    Array y = ops::MeanAll(
        &tape, ops::Square(&tape, ops::Sigmoid(&tape, ops::Scale(&tape, x, 1.7))));
    tape.Backward(y);
    return std::make_pair(y.item(), x.grad());
  };
  auto a = run(123);
  auto b = run(123);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}
