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

#include "train/synthvoice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "core/common.hpp"
#include "core/rng.hpp"
#include "train/wav.hpp"

namespace hacomp {
namespace synthvoice {

namespace {

struct Resonator {
  double a1, a2, g;
  double y1 = 0, y2 = 0;
  Resonator(double f_hz, double bw_hz, double fs) {
    const double r = std::exp(-M_PI * bw_hz / fs);
    a1 = -2.0 * r * std::cos(2.0 * M_PI * f_hz / fs);
    a2 = r * r;
    g = 1.0 - r;
  }
  double Tick(double x) {
    const double y = g * x - a1 * y1 - a2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

}  // namespace

std::vector<double> Sentence(uint64_t seed, double duration_s,
                             double sample_rate_hz) {
  Rng rng(seed);
  const double fs = sample_rate_hz;
  const int64_t total = static_cast<int64_t>(duration_s * fs);
  std::vector<double> out(static_cast<size_t>(total), 0.0);

  int64_t pos = static_cast<int64_t>(rng.NextUniform(0.01, 0.04) * fs);
  while (pos < total - static_cast<int64_t>(0.05 * fs)) {
    const bool fricative = rng.NextUnit() < 0.25;
    const int64_t seg_len = static_cast<int64_t>(
        rng.NextUniform(fricative ? 0.06 : 0.12, fricative ? 0.12 : 0.28) * fs);
    const int64_t end = std::min(total, pos + seg_len);
    const double amp = rng.NextUniform(0.4, 1.0);

    if (fricative) {
      // Band-limited noise burst centred in the fricative range.
      Resonator band(rng.NextUniform(2600.0, 5200.0), 1600.0, fs);
      double prev = 0.0;
      for (int64_t i = pos; i < end; ++i) {
        const double x = rng.NextGaussian();
        const double hp = x - 0.85 * prev;
        prev = x;
        const double phase = static_cast<double>(i - pos) / static_cast<double>(end - pos);
        const double env = std::sin(M_PI * phase);
        out[static_cast<size_t>(i)] += 2.4 * amp * env * band.Tick(hp);
      }
    } else {
      // Voiced syllable: glottal pulse train through two formants.
      const double f0 = rng.NextUniform(110.0, 220.0);
      Resonator f1(rng.NextUniform(300.0, 850.0), 90.0, fs);
      Resonator f2(rng.NextUniform(900.0, 2400.0), 140.0, fs);
      Resonator f3(rng.NextUniform(2600.0, 4200.0), 250.0, fs);
      double phase = 0.0;
      for (int64_t i = pos; i < end; ++i) {
        phase += f0 / fs;
        double pulse = 0.0;
        if (phase >= 1.0) {
          phase -= 1.0;
          pulse = 1.0;
        }
        const double frac = static_cast<double>(i - pos) / static_cast<double>(end - pos);
        const double env = std::sin(M_PI * std::min(1.0, frac * 1.15));
        const double v = f1.Tick(pulse) + 0.7 * f2.Tick(pulse) + 0.35 * f3.Tick(pulse);
        out[static_cast<size_t>(i)] += amp * env * v;
      }
    }
    pos = end + static_cast<int64_t>(rng.NextUniform(0.02, 0.09) * fs);
  }

  // Gentle global lowpass keeps the content inside the band the compensation
  // model can reach (one pole at 7 kHz).
  {
    const double alpha = 1.0 - std::exp(-2.0 * M_PI * 7000.0 / fs);
    double state = 0.0;
    for (double& v : out) {
      state += alpha * (v - state);
      v = state;
    }
  }
  // Keep peaks well inside full scale.
  double peak = 0;
  for (double v : out) peak = std::max(peak, std::fabs(v));
  if (peak > 0)
    for (double& v : out) v *= 0.5 / peak;
  return out;
}

void WriteCorpus(const std::string& dir, int64_t count, double duration_s,
                 double sample_rate_hz, uint64_t seed, bool float32) {
  std::filesystem::create_directories(dir);
  for (int64_t i = 0; i < count; ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "sentence_%03d.wav", static_cast<int>(i));
    const std::vector<double> s =
        Sentence(seed + static_cast<uint64_t>(i) * 7919ULL, duration_s,
                 sample_rate_hz);
    wav::Write(dir + "/" + name, s, sample_rate_hz, float32);
  }
}

}  // namespace synthvoice
}  // namespace hacomp
