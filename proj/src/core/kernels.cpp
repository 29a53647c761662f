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

#include "core/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cstring>

namespace hacomp {
namespace kernels {

namespace {

std::atomic<bool> g_parallel{true};

bool InitFromEnv() {
  const char* env = std::getenv("HACOMP_SERIAL");
  if (env && env[0] == '1') g_parallel.store(false);
  return true;
}
const bool g_env_inited = InitFromEnv();

}  // namespace

bool ParallelEnabled() { return g_parallel.load(std::memory_order_relaxed); }
void SetParallel(bool enabled) { g_parallel.store(enabled); }

// ---------------------------------------------------------------------------
// conv1d forward

static inline void Conv1dForwardOneOut(const double* in, int64_t ci_n,
                                       int64_t t_in, const double* w,
                                       int64_t k_n, const double* bias,
                                       int64_t stride, int64_t pad_left,
                                       double* out, int64_t t_out, int64_t co) {
  const double b = bias ? bias[co] : 0.0;
  for (int64_t to = 0; to < t_out; ++to) {
    const int64_t base = to * stride - pad_left;
    // Clip the kernel to the valid input range once per output sample.
    const int64_t k_lo = std::max<int64_t>(0, -base);
    const int64_t k_hi = std::min<int64_t>(k_n, t_in - base);
    double acc = b;
    for (int64_t ci = 0; ci < ci_n; ++ci) {
      const double* in_row = in + ci * t_in + base;
      const double* w_row = w + (co * ci_n + ci) * k_n;
      for (int64_t k = k_lo; k < k_hi; ++k) acc += w_row[k] * in_row[k];
    }
    out[co * t_out + to] = acc;
  }
}

void Conv1dForwardSerial(const double* in, int64_t ci_n, int64_t t_in,
                         const double* w, int64_t co_n, int64_t k_n,
                         const double* bias, int64_t stride, int64_t pad_left,
                         double* out, int64_t t_out) {
  for (int64_t co = 0; co < co_n; ++co)
    Conv1dForwardOneOut(in, ci_n, t_in, w, k_n, bias, stride, pad_left, out,
                        t_out, co);
}

void Conv1dForward(const double* in, int64_t ci_n, int64_t t_in,
                   const double* w, int64_t co_n, int64_t k_n,
                   const double* bias, int64_t stride, int64_t pad_left,
                   double* out, int64_t t_out) {
  if (!ParallelEnabled() || co_n < 2) {
    Conv1dForwardSerial(in, ci_n, t_in, w, co_n, k_n, bias, stride, pad_left,
                        out, t_out);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int64_t co = 0; co < co_n; ++co)
    Conv1dForwardOneOut(in, ci_n, t_in, w, k_n, bias, stride, pad_left, out,
                        t_out, co);
}

// ---------------------------------------------------------------------------
// adjoint w.r.t. input (gather form: each destination sample owned by one
// iteration, so the parallel loop is race-free and deterministic)

static inline void Conv1dGradInputOneRow(const double* gout, int64_t j_n,
                                         int64_t t_src, const double* w,
                                         int64_t c_n, int64_t k_n,
                                         int64_t stride, int64_t pad_left,
                                         double* gin, int64_t t_dst,
                                         bool accumulate, int64_t c) {
  for (int64_t tau = 0; tau < t_dst; ++tau) {
    double acc = accumulate ? gin[c * t_dst + tau] : 0.0;
    // Need k with (tau + pad_left - k) divisible by stride and the quotient
    // inside [0, t_src).
    const int64_t shifted = tau + pad_left;
    int64_t k0 = shifted % stride;
    for (int64_t k = k0; k < k_n; k += stride) {
      const int64_t q = (shifted - k) / stride;
      if (q < 0) break;  // k beyond shifted: quotient only decreases further
      if (q >= t_src) continue;
      for (int64_t j = 0; j < j_n; ++j)
        acc += w[(j * c_n + c) * k_n + k] * gout[j * t_src + q];
    }
    gin[c * t_dst + tau] = acc;
  }
}

void Conv1dGradInputSerial(const double* gout, int64_t j_n, int64_t t_src,
                           const double* w, int64_t c_n, int64_t k_n,
                           int64_t stride, int64_t pad_left, double* gin,
                           int64_t t_dst, bool accumulate) {
  for (int64_t c = 0; c < c_n; ++c)
    Conv1dGradInputOneRow(gout, j_n, t_src, w, c_n, k_n, stride, pad_left, gin,
                          t_dst, accumulate, c);
}

void Conv1dGradInput(const double* gout, int64_t j_n, int64_t t_src,
                     const double* w, int64_t c_n, int64_t k_n, int64_t stride,
                     int64_t pad_left, double* gin, int64_t t_dst,
                     bool accumulate) {
  if (!ParallelEnabled() || c_n < 2) {
    Conv1dGradInputSerial(gout, j_n, t_src, w, c_n, k_n, stride, pad_left, gin,
                          t_dst, accumulate);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int64_t c = 0; c < c_n; ++c)
    Conv1dGradInputOneRow(gout, j_n, t_src, w, c_n, k_n, stride, pad_left, gin,
                          t_dst, accumulate, c);
}

// ---------------------------------------------------------------------------
// gradient w.r.t. kernels

static inline void Conv1dGradKernelsOnePair(const double* in, int64_t ci_n,
                                            int64_t t_in, const double* gout,
                                            int64_t t_out, int64_t k_n,
                                            int64_t stride, int64_t pad_left,
                                            double* gw, int64_t co,
                                            int64_t ci) {
  const double* g_row = gout + co * t_out;
  const double* in_row = in + ci * t_in;
  double* gw_row = gw + (co * ci_n + ci) * k_n;
  for (int64_t k = 0; k < k_n; ++k) {
    double acc = gw_row[k];
    for (int64_t to = 0; to < t_out; ++to) {
      const int64_t t = to * stride - pad_left + k;
      if (t < 0 || t >= t_in) continue;
      acc += g_row[to] * in_row[t];
    }
    gw_row[k] = acc;
  }
}

void Conv1dGradKernelsSerial(const double* in, int64_t ci_n, int64_t t_in,
                             const double* gout, int64_t co_n, int64_t t_out,
                             int64_t k_n, int64_t stride, int64_t pad_left,
                             double* gw) {
  for (int64_t co = 0; co < co_n; ++co)
    for (int64_t ci = 0; ci < ci_n; ++ci)
      Conv1dGradKernelsOnePair(in, ci_n, t_in, gout, t_out, k_n, stride,
                               pad_left, gw, co, ci);
}

void Conv1dGradKernels(const double* in, int64_t ci_n, int64_t t_in,
                       const double* gout, int64_t co_n, int64_t t_out,
                       int64_t k_n, int64_t stride, int64_t pad_left,
                       double* gw) {
  const int64_t pairs = co_n * ci_n;
  if (!ParallelEnabled() || pairs < 2) {
    Conv1dGradKernelsSerial(in, ci_n, t_in, gout, co_n, t_out, k_n, stride,
                            pad_left, gw);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int64_t p = 0; p < pairs; ++p)
    Conv1dGradKernelsOnePair(in, ci_n, t_in, gout, t_out, k_n, stride, pad_left,
                             gw, p / ci_n, p % ci_n);
}

// ---------------------------------------------------------------------------
// biquad cascades

static inline void BiquadOneRow(const double* x, int64_t t,
                                const double* coeffs, int64_t sections,
                                double* y) {
  std::memcpy(y, x, sizeof(double) * t);
  for (int64_t s = 0; s < sections; ++s) {
    const double b0 = coeffs[s * 5 + 0];
    const double b1 = coeffs[s * 5 + 1];
    const double b2 = coeffs[s * 5 + 2];
    const double a1 = coeffs[s * 5 + 3];
    const double a2 = coeffs[s * 5 + 4];
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (int64_t n = 0; n < t; ++n) {
      const double xn = y[n];
      const double yn = b0 * xn + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
      x2 = x1;
      x1 = xn;
      y2 = y1;
      y1 = yn;
      y[n] = yn;
    }
  }
}

static inline void BiquadOneRowReversed(const double* x, int64_t t,
                                        const double* coeffs, int64_t sections,
                                        double* y) {
  // Run the cascade on the reversed signal, then reverse the result.
  std::vector<double> tmp(t);
  for (int64_t n = 0; n < t; ++n) tmp[n] = x[t - 1 - n];
  BiquadOneRow(tmp.data(), t, coeffs, sections, tmp.data());
  for (int64_t n = 0; n < t; ++n) y[n] = tmp[t - 1 - n];
}

void BiquadRowsSerial(const double* in, int64_t rows, int64_t t,
                      const double* coeffs, int64_t sections, double* out) {
  for (int64_t r = 0; r < rows; ++r)
    BiquadOneRow(in + r * t, t, coeffs + r * sections * 5, sections,
                 out + r * t);
}

void BiquadRows(const double* in, int64_t rows, int64_t t, const double* coeffs,
                int64_t sections, double* out) {
  if (!ParallelEnabled() || rows < 2) {
    BiquadRowsSerial(in, rows, t, coeffs, sections, out);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int64_t r = 0; r < rows; ++r)
    BiquadOneRow(in + r * t, t, coeffs + r * sections * 5, sections,
                 out + r * t);
}

void BiquadRowsAdjointSerial(const double* in, int64_t rows, int64_t t,
                             const double* coeffs, int64_t sections,
                             double* out) {
  for (int64_t r = 0; r < rows; ++r)
    BiquadOneRowReversed(in + r * t, t, coeffs + r * sections * 5, sections,
                         out + r * t);
}

void BiquadRowsAdjoint(const double* in, int64_t rows, int64_t t,
                       const double* coeffs, int64_t sections, double* out) {
  if (!ParallelEnabled() || rows < 2) {
    BiquadRowsAdjointSerial(in, rows, t, coeffs, sections, out);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int64_t r = 0; r < rows; ++r)
    BiquadOneRowReversed(in + r * t, t, coeffs + r * sections * 5, sections,
                         out + r * t);
}

// ---------------------------------------------------------------------------
// one-pole lowpass

static inline void OnePoleOneRow(const double* x, int64_t t, double alpha,
                                 double* y) {
  double state = 0.0;
  for (int64_t n = 0; n < t; ++n) {
    state += alpha * (x[n] - state);
    y[n] = state;
  }
}

static inline void OnePoleOneRowReversed(const double* x, int64_t t,
                                         double alpha, double* y) {
  double state = 0.0;
  // Adjoint of the zero-state recursion: same filter, time reversed. Writing
  // front-to-back here would clobber inputs when in == out, so buffer.
  std::vector<double> tmp(t);
  for (int64_t n = t - 1; n >= 0; --n) {
    state += alpha * (x[n] - state);
    tmp[n] = state;
  }
  std::memcpy(y, tmp.data(), sizeof(double) * t);
}

void OnePoleRowsSerial(const double* in, int64_t rows, int64_t t, double alpha,
                       double* out) {
  for (int64_t r = 0; r < rows; ++r) OnePoleOneRow(in + r * t, t, alpha, out + r * t);
}

void OnePoleRows(const double* in, int64_t rows, int64_t t, double alpha,
                 double* out) {
  if (!ParallelEnabled() || rows < 2) {
    OnePoleRowsSerial(in, rows, t, alpha, out);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int64_t r = 0; r < rows; ++r) OnePoleOneRow(in + r * t, t, alpha, out + r * t);
}

void OnePoleRowsAdjointSerial(const double* in, int64_t rows, int64_t t,
                              double alpha, double* out) {
  for (int64_t r = 0; r < rows; ++r)
    OnePoleOneRowReversed(in + r * t, t, alpha, out + r * t);
}

void OnePoleRowsAdjoint(const double* in, int64_t rows, int64_t t, double alpha,
                        double* out) {
  if (!ParallelEnabled() || rows < 2) {
    OnePoleRowsAdjointSerial(in, rows, t, alpha, out);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int64_t r = 0; r < rows; ++r)
    OnePoleOneRowReversed(in + r * t, t, alpha, out + r * t);
}

}  // namespace kernels
}  // namespace hacomp
