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
// Hot inner loops, each in two flavours: a plain serial reference and an
// OpenMP-parallel version. The parallel versions assign every output element
// to exactly one thread and keep a fixed per-element summation order, so both
// flavours produce bit-identical results. Tests assert that equality; the
// bench tool compares their throughput.

#ifndef HACOMP_CORE_KERNELS_H_
#define HACOMP_CORE_KERNELS_H_

#include <cstdint>
#include <vector>

namespace hacomp {
namespace kernels {

// Process-wide switch consulted by the dispatching entry points below.
// Defaults to on; HACOMP_SERIAL=1 in the environment turns it off.
bool ParallelEnabled();
void SetParallel(bool enabled);

// -- Strided 1-D cross-correlation, "same" zero padding -----------------
// in:   [ci_n x t_in], row-major
// w:    [co_n x ci_n x k_n]
// out:  [co_n x t_out], t_out = ceil(t_in / stride)
// pad_left as precomputed by the caller from (t_in, k_n, stride).
void Conv1dForwardSerial(const double* in, int64_t ci_n, int64_t t_in,
                         const double* w, int64_t co_n, int64_t k_n,
                         const double* bias, int64_t stride, int64_t pad_left,
                         double* out, int64_t t_out);
void Conv1dForward(const double* in, int64_t ci_n, int64_t t_in,
                   const double* w, int64_t co_n, int64_t k_n,
                   const double* bias, int64_t stride, int64_t pad_left,
                   double* out, int64_t t_out);

// Adjoint of the correlation above with respect to its input. Also serves as
// the forward pass of the transposed convolution (kernels then stored
// [j_n x c_n x k_n] with j_n the input channels of the transposed op).
// grad_out / in_t: [j_n x t_src]; result accumulated into gin: [c_n x t_dst].
void Conv1dGradInputSerial(const double* gout, int64_t j_n, int64_t t_src,
                           const double* w, int64_t c_n, int64_t k_n,
                           int64_t stride, int64_t pad_left, double* gin,
                           int64_t t_dst, bool accumulate);
void Conv1dGradInput(const double* gout, int64_t j_n, int64_t t_src,
                     const double* w, int64_t c_n, int64_t k_n, int64_t stride,
                     int64_t pad_left, double* gin, int64_t t_dst,
                     bool accumulate);

// Gradient with respect to the kernels: gw[co][ci][k] += sum_t gout * in_pad.
void Conv1dGradKernelsSerial(const double* in, int64_t ci_n, int64_t t_in,
                             const double* gout, int64_t co_n, int64_t t_out,
                             int64_t k_n, int64_t stride, int64_t pad_left,
                             double* gw);
void Conv1dGradKernels(const double* in, int64_t ci_n, int64_t t_in,
                       const double* gout, int64_t co_n, int64_t t_out,
                       int64_t k_n, int64_t stride, int64_t pad_left,
                       double* gw);

// -- Per-row biquad cascades ---------------------------------------------
// One cascade of second-order sections per row, zero initial state.
// coeffs: per row, sections * 5 doubles laid out (b0, b1, b2, a1, a2).
void BiquadRowsSerial(const double* in, int64_t rows, int64_t t,
                      const double* coeffs, int64_t sections, double* out);
void BiquadRows(const double* in, int64_t rows, int64_t t, const double* coeffs,
                int64_t sections, double* out);

// Same cascade run on the time-reversed signal and reversed back: exactly the
// adjoint of BiquadRows for finite-length zero-state filtering.
void BiquadRowsAdjointSerial(const double* in, int64_t rows, int64_t t,
                             const double* coeffs, int64_t sections,
                             double* out);
void BiquadRowsAdjoint(const double* in, int64_t rows, int64_t t,
                       const double* coeffs, int64_t sections, double* out);

// -- One-pole lowpass per row: y[n] = y[n-1] + alpha (x[n] - y[n-1]) ------
void OnePoleRowsSerial(const double* in, int64_t rows, int64_t t, double alpha,
                       double* out);
void OnePoleRows(const double* in, int64_t rows, int64_t t, double alpha,
                 double* out);
void OnePoleRowsAdjointSerial(const double* in, int64_t rows, int64_t t,
                              double alpha, double* out);
void OnePoleRowsAdjoint(const double* in, int64_t rows, int64_t t, double alpha,
                        double* out);

// Generic parallel loop over [0, n) used by coarse-grained call sites
// (periphery channels, STFT frames, evaluation sentences). Iterations must be
// independent; results are written to disjoint locations so scheduling cannot
// change the outcome.
template <typename Fn>
void ParallelFor(int64_t n, const Fn& fn) {
  if (ParallelEnabled()) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) fn(i);
  } else {
    for (int64_t i = 0; i < n; ++i) fn(i);
  }
}

}  // namespace kernels
}  // namespace hacomp

#endif  // HACOMP_CORE_KERNELS_H_
