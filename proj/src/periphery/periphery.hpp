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
// Differentiable analytical model of the normal-hearing / hearing-impaired
// auditory periphery: middle ear, compressive cochlear filterbank with
// OHC-loss-dependent active gain, IHC transduction, and three adapting
// auditory-nerve fibre populations combined into a summed response.
//
// Every stage is smooth and built from taped ops, so gradients flow from the
// summed response back to the acoustic input. The model itself has no
// trainable parameters; all constants live in PeripheryConfig.
//
// Conventions:
//   * Channels are ordered by ascending centre frequency.
//   * Silence is a fixed point: every stage operates on deviations from its
//     resting value, so a zero input produces the resting output from the
//     first sample, with no filter warm-up transient.

#ifndef HACOMP_PERIPHERY_PERIPHERY_H_
#define HACOMP_PERIPHERY_PERIPHERY_H_

#include <cstdint>
#include <string>
#include <vector>

#include "core/array.hpp"

namespace hacomp {
namespace periphery {

// Centre frequencies placed on the Greenwood human place-frequency map
// f(x) = A (10^(a x) - k), A = 165.4, a = 2.1, k = 0.88, with map positions
// sampled uniformly between the positions of f_min and f_max.
struct CFMap {
  std::vector<double> cf_hz;  // ascending
  int64_t channels() const { return static_cast<int64_t>(cf_hz.size()); }
};

CFMap GreenwoodCf(int64_t n, double f_min_hz, double f_max_hz);
double GreenwoodPosition(double f_hz);   // inverse map, x in [0, 1]
double GreenwoodFrequency(double x);

// Per-channel OHC gain loss plus ANF counts. 1 dB of audiogram loss removes
// 1 dB of maximum active gain at that CF.
struct HearingProfile {
  std::string name;
  std::vector<double> ohc_loss_db;  // aligned with a CFMap, >= 0
  double fibers_h = 13.0;
  double fibers_m = 3.0;
  double fibers_l = 3.0;
};

// loss(f) = 0 below 1 kHz, hl_at_8k * log2(f / 1 kHz) / 3 up to 8 kHz, then
// held at hl_at_8k.
std::vector<double> SlopingAudiogram(double hl_at_8k_db, const CFMap& map);

// Named presets: NH, Slope35, Slope25, Flat35, CS-7-0-0, CS-13-0-0. Composite
// names combine an audiogram preset with a CS preset, e.g. "Slope35+CS-7-0-0".
HearingProfile PresetProfile(const std::string& name, const CFMap& map);
std::vector<std::string> PresetProfileNames();

std::string ProfileToJson(const HearingProfile& profile);
HearingProfile ProfileFromJson(const std::string& json, const CFMap& map);

// All surrogate constants, with defaults chosen for plausible compression,
// adaptation and rate-level behaviour at a 20 kHz rate.
struct PeripheryConfig {
  double sample_rate_hz = 20000.0;

  // Middle ear: first-order high-pass and low-pass, unit gain at 1 kHz.
  double me_highpass_hz = 600.0;
  double me_lowpass_hz = 3000.0;

  // Cochlea: fourth-order all-pole gammatone per channel, unit gain at CF.
  double erb_q = 9.26449;       // Glasberg & Moore ERB constants
  double erb_min_bw = 24.7;
  double erb_scale = 1.019;
  int64_t gammatone_order = 4;

  // Level-dependent active gain: total gain (1 + a c(e)) with
  // c(e) = (1 + (e / knee)^2)^((gamma - 1) / 2) and a scaled so the low-level
  // gain is max_active_gain_db, reduced by the channel's OHC loss.
  double max_active_gain_db = 60.0;
  double compression_knee = 1e-3;     // envelope units (Pa-equivalent)
  double compression_exponent = 0.3;  // in (0, 1]
  double envelope_lp_hz = 80.0;
  double envelope_floor = 1e-6;

  // IHC: scaled softplus rectifier followed by a first-order lowpass.
  double ihc_softplus_scale = 0.25;
  double ihc_half_level = 0.1;
  double ihc_lowpass_hz = 1000.0;

  // ANF rate-level drives (sigmoid in IHC-potential deviation) per fibre
  // type: spontaneous and saturation rates in spikes/s, threshold and width
  // in IHC drive units.
  double anf_sr[3] = {70.0, 10.0, 0.1};        // H, M, L
  double anf_sat[3] = {250.0, 225.0, 200.0};
  double anf_thresh[3] = {0.42, 0.8, 2.0};
  double anf_width[3] = {0.12, 0.2, 0.25};

  // Fast + slow exponential adaptation applied to the driven rate. The fast
  // stage is strong enough that sustained drive depresses far below the
  // response to drive modulated near 100-200 Hz, which keeps envelope
  // fluctuations valuable to the summed rate.
  double adapt_fast_strength = 0.7;
  double adapt_fast_tau_s = 0.001;
  double adapt_slow_strength = 0.2;
  double adapt_slow_tau_s = 0.060;
  double rate_floor_eps = 1e-4;  // smooth rectifier width, spikes/s

  // Dataset plumbing (matches the training-data conventions).
  int64_t context_left = 7936;
  int64_t context_right = 256;
  int64_t block_size = 16384;
};

enum class Fiber { kHigh = 0, kMedium = 1, kLow = 2 };

struct Neurogram {
  Array rates;                 // [channels x time], spikes/s
  std::vector<double> cf_hz;   // ascending, matches rows
  double sample_rate_hz = 20000.0;
};

// Stage functions. Signals are 1-D arrays in pascals at config.sample_rate_hz.
Array MiddleEar(Tape* t, const Array& signal, const PeripheryConfig& cfg);

// Middle-ear magnitude response at a frequency (analytic, for tests/tools).
double MiddleEarGainAt(double f_hz, const PeripheryConfig& cfg);

// Per-CF basilar-membrane-like output: gammatone filtering, then a linear
// passive path summed with a compressive active path whose maximum gain is
// reduced by the channel's OHC loss.
Array CochlearStage(Tape* t, const Array& me_signal,
                    const std::vector<double>& ohc_loss_db, const CFMap& map,
                    const PeripheryConfig& cfg);

Array IhcStage(Tape* t, const Array& bm, const PeripheryConfig& cfg);
double IhcRestingOutput(const PeripheryConfig& cfg);

Array AnfStage(Tape* t, const Array& ihc, Fiber fiber,
               const PeripheryConfig& cfg);
// Model output for silence (constant resting rate of that fibre type).
double AnfRestingRate(Fiber fiber, const PeripheryConfig& cfg);

// r = H r_H + M r_M + L r_L.
Array AnSum(Tape* t, const Array& r_h, const Array& r_m, const Array& r_l,
            double h, double m, double l);

// Sum over the CF axis.
Array PopulationResponse(Tape* t, const Array& neurogram);

// Full chain on a context-padded signal. Requires the length to be a
// positive multiple of cfg.block_size and larger than the context; trims
// context_left leading and context_right trailing samples from the output.
// cf_subset lists channel indices into `map` (empty = all channels).
Neurogram Simulate(Tape* t, const Array& signal, const HearingProfile& profile,
                   const CFMap& map, const std::vector<int64_t>& cf_subset,
                   const PeripheryConfig& cfg);

// Channel indices 0, step, 2*step, ... over n channels (the training-time
// subsampling; step 10 over 201 channels gives 21).
std::vector<int64_t> SubsampleChannels(int64_t n, int64_t step);

}  // namespace periphery
}  // namespace hacomp

#endif  // HACOMP_PERIPHERY_PERIPHERY_H_
