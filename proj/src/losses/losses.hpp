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
// Loss family for training the compensation model against simulated
// auditory-nerve responses, composable into weighted joint objectives.
//
// Kinds:
//   time_channels      MAE over the (optionally squared) CF x time responses
//   time_population    MAE over responses summed across CF (squared first
//                      when requested)
//   stft_channels      MAE over per-CF STFT magnitudes (power spectra when
//                      squared; real+imag parts in complex mode)
//   stft_population    the same on the population response
//   stimulus_highfreq  MAE over stimulus FFT magnitudes above a cutoff
//
// Masks are non-differentiable gates computed from forward values: the
// response threshold builds a per-CF mask from the reference response, the
// stimulus threshold a shared time mask from the unprocessed stimulus
// (sample i of the cropped stimulus maps to sample i of the response). Masks
// apply to the time-domain terms only.

#ifndef HACOMP_LOSSES_LOSSES_H_
#define HACOMP_LOSSES_LOSSES_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/array.hpp"

namespace hacomp {
namespace losses {

enum class Kind {
  kTimeChannels,
  kTimePopulation,
  kStftChannels,
  kStftPopulation,
  kStimulusHighfreq,
};

std::string KindName(Kind k);
Kind KindFromName(const std::string& name);

struct LossTerm {
  Kind kind;
  bool squared = false;
  bool complex_stft = false;
  double weight = 1.0;
};

struct FreqEmphasis {
  double max_attenuation = 0.62;
};

struct ResponseThreshold {
  double fraction = 0.4;
  int64_t rms_win = 51;
  int64_t extrema_win = 1001;
};

struct StimulusThreshold {
  int64_t rms_win = 101;
  double fraction = 0.01;
};

struct LossSpec {
  std::string name;
  std::vector<LossTerm> terms;
  std::optional<FreqEmphasis> freq_emphasis;
  std::optional<ResponseThreshold> response_threshold;
  std::optional<StimulusThreshold> stimulus_threshold;
  int64_t stft_window = 2048;
  int64_t stft_hop = 1024;
  double highfreq_cutoff_hz = 8000.0;

  void Validate() const;
};

// The eight named presets (L_r, L_rR, L_rrp, L_rrpRp, L_r2, L_r2R2, L_r2rp2,
// L_r2rp2Rp2), optionally suffixed with modifiers joined by '+':
//   +Tx (stimulus threshold), +Tr (response threshold),
//   +emph (frequency emphasis), +cplx (complex STFT on the spectral terms).
// e.g. "L_r2rp2Rp2+Tx".
LossSpec Preset(const std::string& name);
std::vector<std::string> PresetNames();

std::string LossSpecToJson(const LossSpec& spec);
LossSpec LossSpecFromJson(const std::string& json);

// -- Individual terms -------------------------------------------------------
// r is the reference (normal-hearing) response, r_hat the impaired one;
// both [CF x T]. cf_weights/mask may be empty.
Array LossR(Tape* t, const Array& r, const Array& r_hat, bool squared,
            const std::vector<double>& cf_weights,
            const std::vector<double>& mask);
Array LossRp(Tape* t, const Array& r, const Array& r_hat, bool squared,
             const std::vector<double>& time_mask);
Array LossStftChannels(Tape* t, const Array& r, const Array& r_hat,
                       bool squared, bool complex_out, int64_t window,
                       int64_t hop);
Array LossStftPopulation(Tape* t, const Array& r, const Array& r_hat,
                         bool squared, bool complex_out, int64_t window,
                         int64_t hop);
// MAE of one-sided FFT magnitudes over bins strictly above cutoff_hz.
Array LossXHighfreq(Tape* t, const Array& x, const Array& x_hat,
                    double cutoff_hz, double sample_rate_hz);

// -- Modifier builders -------------------------------------------------------
// Smooth monotone per-CF weights from 1.0 at the lowest CF down to
// (1 - max_attenuation) at the highest; logistic in log-frequency with the
// midpoint at the geometric-mean CF.
std::vector<double> FreqEmphasisWeights(const std::vector<double>& cf_hz,
                                        double max_attenuation);

// Per-sample mask (1.0/0.0, row-major [CF x T]) where the response strictly
// exceeds the moving threshold built from moving-RMS extrema. Boundary
// windows shrink (no padding).
std::vector<double> ResponseThresholdMask(const std::vector<double>& r,
                                          int64_t channels, int64_t time,
                                          const ResponseThreshold& cfg);

// Time mask where the moving stimulus RMS reaches fraction * max moving RMS;
// the all-zero signal yields an all-false mask.
std::vector<double> StimulusThresholdMask(const std::vector<double>& x,
                                          const StimulusThreshold& cfg);

// Moving RMS / max / min with centered shrinking windows (shared with tests).
std::vector<double> MovingRms(const std::vector<double>& x, int64_t win);
std::vector<double> MovingMax(const std::vector<double>& x, int64_t win);
std::vector<double> MovingMin(const std::vector<double>& x, int64_t win);

// -- Composition -------------------------------------------------------------
struct LossBundle {
  Array x;       // unprocessed stimulus, cropped to the response extent
  Array x_hat;   // processed stimulus, same extent
  Array r;       // reference response [CF x T]
  Array r_hat;   // impaired response [CF x T]
  std::vector<double> cf_hz;
  double sample_rate_hz = 20000.0;
};

struct TermValue {
  Kind kind;
  bool squared;
  double weight;
  double raw;       // unweighted term value
  double weighted;  // weight * raw
};

struct ComposedLoss {
  Array total;  // scalar, on tape
  std::vector<TermValue> breakdown;
};

ComposedLoss Compose(Tape* t, const LossSpec& spec, const LossBundle& bundle);

}  // namespace losses
}  // namespace hacomp

#endif  // HACOMP_LOSSES_LOSSES_H_
