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
// Differentiable operations. Every op takes the recording tape as its first
// argument; pass nullptr to run forward-only. Non-smooth points use fixed,
// documented subgradients:
//   * Abs contributes 0 at the origin.
//   * ReduceMax routes the gradient to the first maximal element on ties.
//   * Magnitude-spectrum bins with zero magnitude contribute 0.

#ifndef HACOMP_CORE_OPS_H_
#define HACOMP_CORE_OPS_H_

#include <cstdint>
#include <vector>

#include "core/array.hpp"

namespace hacomp {
namespace ops {

// -- Elementwise (shapes equal, or either operand scalar-broadcast) -------
Array Add(Tape* t, const Array& a, const Array& b);
Array Sub(Tape* t, const Array& a, const Array& b);
Array Mul(Tape* t, const Array& a, const Array& b);
Array Neg(Tape* t, const Array& a);
Array Square(Tape* t, const Array& a);
Array Abs(Tape* t, const Array& a);
Array Sqrt(Tape* t, const Array& a);            // requires a > 0
Array Scale(Tape* t, const Array& a, double c);
Array AddConst(Tape* t, const Array& a, double c);
Array PowConst(Tape* t, const Array& a, double p);  // requires a > 0
Array Sigmoid(Tape* t, const Array& a);
// 0.5 (1 + x / sqrt(1 + x^2)): logistic-shaped with algebraic tails.
Array AlgebraicSigmoid(Tape* t, const Array& a);
Array Softplus(Tape* t, const Array& a);
// Smooth max(x, 0): 0.5 (x + sqrt(x^2 + eps^2)).
Array SmoothRelu(Tape* t, const Array& a, double eps);
// a * x + b, fused.
Array Affine(Tape* t, const Array& x, double a, double b);
// c1 x1 + c2 x2 + c3 x3 + bias, all shapes equal.
Array LinComb3(Tape* t, const Array& x1, const Array& x2, const Array& x3,
               double c1, double c2, double c3, double bias);
// Replicate a 1-D signal into n identical rows; gradient sums over rows.
Array RepeatRows(Tape* t, const Array& x, int64_t n);

// Multiply each row of a [rows x cols] array by a fixed (non-trainable)
// per-row weight.
Array ScaleRows(Tape* t, const Array& a, const std::vector<double>& row_weights);
// Elementwise product with a fixed 0/1 mask; mask.size() must equal a.size()
// or, for 2-D a, the number of columns (broadcast over rows).
Array MulMask(Tape* t, const Array& a, const std::vector<double>& mask);

// -- Reductions ------------------------------------------------------------
// axis = -1 reduces over all elements to a scalar.
enum class ReduceKind { kSum, kMean, kMax };
Array Reduce(Tape* t, const Array& a, int axis, ReduceKind kind);
Array SumAll(Tape* t, const Array& a);
Array MeanAll(Tape* t, const Array& a);

// Mean absolute difference over all elements.
Array Mae(Tape* t, const Array& a, const Array& b);
// MAE restricted to mask==1 entries with optional per-row weights applied to
// |a - b|; divides by the retained count. An empty mask retains everything;
// an all-zero mask yields 0 (documented degenerate case).
Array MaskedMae(Tape* t, const Array& a, const Array& b,
                const std::vector<double>& row_weights,
                const std::vector<double>& mask);

// -- Structure -------------------------------------------------------------
// Columns [start, start+len) of the last axis.
Array SliceCols(Tape* t, const Array& a, int64_t start, int64_t len);
// Concatenate along the last axis (all leading dims equal).
Array ConcatCols(Tape* t, const std::vector<Array>& parts);
// Stack along the first axis of 2-D arrays (equal column counts).
Array ConcatRows(Tape* t, const Array& a, const Array& b);
// Copy of `base` with columns [offset, offset+patch.cols) replaced by
// `patch`. Gradients flow to both operands (to `base` outside the patch).
Array SpliceCols(Tape* t, const Array& base, const Array& patch, int64_t offset);
Array Reshape(Tape* t, const Array& a, std::vector<int64_t> shape);

// -- Neural-network layers ---------------------------------------------------
// Strided cross-correlation with "same" zero padding: output length
// ceil(T/stride); when total padding is odd the extra zero goes on the right.
// input [Ci x T], kernels [Co x Ci x K], bias [Co].
Array Conv1d(Tape* t, const Array& input, const Array& kernels,
             const Array& bias, int64_t stride);
// Exact adjoint of Conv1d with the same stride and padding rule; output
// length stride * T. kernels [Ci x Co x K] (first axis = this op's input
// channels), bias [Co].
Array Conv1dTransposed(Tape* t, const Array& input, const Array& kernels,
                       const Array& bias, int64_t stride);
// out = x where x >= 0 else alpha * x; alpha is [C] (per row) or [1].
Array Prelu(Tape* t, const Array& input, const Array& alpha);

// -- Spectra ---------------------------------------------------------------
// Frames of periodic-Hann-windowed DFT magnitudes; hop defaults to half the
// window. Frames cover only fully valid positions (no centering). Output:
//   1-D input: [frames x bins]
//   2-D input: [rows x frames*bins]
// squared: power spectrogram |X|^2. complex_out: per frame the real parts of
// all bins followed by the imaginary parts (bins column count doubles);
// squared and complex_out are mutually exclusive.
Array StftMag(Tape* t, const Array& signal, int64_t window_len, int64_t hop,
              bool squared, bool complex_out);
// One-sided magnitude spectrum of a 1-D signal, length T/2+1; T must be even.
Array FftMag(Tape* t, const Array& signal);

// -- Fixed linear filters (coefficients are data, not trainable) ------------
// Cascade of biquad sections per row, zero initial state; coeffs is
// rows * sections * 5 doubles, (b0, b1, b2, a1, a2) per section. 1-D input is
// treated as a single row (coeffs for one row).
Array BiquadCascade(Tape* t, const Array& a, std::vector<double> coeffs,
                    int64_t sections);
// One-pole lowpass y[n] = y[n-1] + alpha (x[n] - y[n-1]), zero initial state.
Array OnePoleLowpass(Tape* t, const Array& a, double alpha);

// Helpers shared with tests and the DNN module.
int64_t ConvOutLen(int64_t t_in, int64_t stride);
int64_t ConvPadLeft(int64_t t_in, int64_t k, int64_t stride);
int64_t StftFrameCount(int64_t t, int64_t window_len, int64_t hop);

}  // namespace ops
}  // namespace hacomp

#endif  // HACOMP_CORE_OPS_H_
