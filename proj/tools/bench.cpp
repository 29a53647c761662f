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
//
// Throughput comparison of the serial reference kernels against the
// OpenMP-parallel defaults, plus one end-to-end periphery timing.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "core/kernels.hpp"
#include "core/ops.hpp"
#include "core/rng.hpp"
#include "periphery/periphery.hpp"

using namespace hacomp;

namespace {

double TimeIt(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

void Report(const char* name, double serial_s, double parallel_s) {
  std::printf("%-28s serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n",
              name, serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s);
}

}  // namespace

int main() {
  Rng rng(1);
  std::printf("kernel benchmark (parallel backend %s)\n",
              kernels::ParallelEnabled() ? "on" : "off");

  {
    const int64_t ci = 64, co = 128, t = 4096, k = 32, stride = 2;
    std::vector<double> x(ci * t), w(co * ci * k), b(co);
    for (auto& v : x) v = rng.NextUniform(-1, 1);
    for (auto& v : w) v = rng.NextUniform(-1, 1);
    const int64_t to = ops::ConvOutLen(t, stride);
    const int64_t pl = ops::ConvPadLeft(t, k, stride);
    std::vector<double> out(co * to);
    const double serial = TimeIt(
        [&] {
          kernels::Conv1dForwardSerial(x.data(), ci, t, w.data(), co, k, b.data(),
                                       stride, pl, out.data(), to);
        },
        3);
    const double parallel = TimeIt(
        [&] {
          kernels::Conv1dForward(x.data(), ci, t, w.data(), co, k, b.data(),
                                 stride, pl, out.data(), to);
        },
        3);
    Report("conv1d 64x128 k32 T4096", serial, parallel);
  }

  {
    const int64_t rows = 21, t = 81920, sections = 4;
    std::vector<double> x(rows * t), coeffs(rows * sections * 5), out(rows * t);
    for (auto& v : x) v = rng.NextUniform(-1, 1);
    for (int64_t r = 0; r < rows; ++r)
      for (int64_t s = 0; s < sections; ++s) {
        double* c = coeffs.data() + (r * sections + s) * 5;
        c[0] = 0.1;
        c[3] = -1.2;
        c[4] = 0.5;
      }
    const double serial = TimeIt(
        [&] {
          kernels::BiquadRowsSerial(x.data(), rows, t, coeffs.data(), sections,
                                    out.data());
        },
        3);
    const double parallel = TimeIt(
        [&] {
          kernels::BiquadRows(x.data(), rows, t, coeffs.data(), sections,
                              out.data());
        },
        3);
    Report("biquad 21 rows x 81920", serial, parallel);
  }

  {
    using namespace periphery;
    PeripheryConfig cfg;
    CFMap map = GreenwoodCf(201, 112, 12000);
    HearingProfile nh = PresetProfile("NH", map);
    std::vector<double> sig(81920);
    for (auto& v : sig) v = 0.01 * rng.NextUniform(-1, 1);
    Array x = Array::FromVector({81920}, sig);
    auto subset = SubsampleChannels(201, 10);
    auto run = [&] { Simulate(nullptr, x, nh, map, subset, cfg); };
    kernels::SetParallel(false);
    const double serial = TimeIt(run, 1);
    kernels::SetParallel(true);
    const double parallel = TimeIt(run, 1);
    Report("periphery 21ch x 81920", serial, parallel);
  }
  return 0;
}
