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

#ifndef HACOMP_CORE_FFT_H_
#define HACOMP_CORE_FFT_H_

#include <complex>
#include <cstdint>
#include <vector>

namespace hacomp {
namespace fft {

using Complex = std::complex<double>;

// In-place complex DFT, X_k = sum_n x_n e^{-2 pi i k n / N}. Radix-2 when N
// is a power of two, Bluestein's chirp-z otherwise; any N >= 1.
void Forward(std::vector<Complex>* data);
// Unscaled inverse (conjugate transform); divide by N for a true inverse.
void Inverse(std::vector<Complex>* data);

// Forward DFT of a real signal; returns all N bins.
std::vector<Complex> ForwardReal(const double* x, int64_t n);

}  // namespace fft
}  // namespace hacomp

#endif  // HACOMP_CORE_FFT_H_
