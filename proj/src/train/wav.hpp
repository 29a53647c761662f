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

#ifndef HACOMP_TRAIN_WAV_H_
#define HACOMP_TRAIN_WAV_H_

#include <cstdint>
#include <string>
#include <vector>

namespace hacomp {
namespace wav {

struct WavData {
  std::vector<double> samples;  // mono
  double sample_rate_hz = 0;
  bool was_float = false;
};

// Mono 16-bit PCM or 32-bit IEEE float only; anything else is an error.
WavData Read(const std::string& path);

// format: 16-bit PCM when float32 == false. Values are clipped to [-1, 1]
// for PCM output.
void Write(const std::string& path, const std::vector<double>& samples,
           double sample_rate_hz, bool float32 = true);

// 32-lobe Hann-windowed-sinc resampler, cutoff at 95% of the narrower
// Nyquist. Output length = round(n * rate_out / rate_in).
std::vector<double> Resample(const std::vector<double>& in, double rate_in,
                             double rate_out);

}  // namespace wav
}  // namespace hacomp

#endif  // HACOMP_TRAIN_WAV_H_
