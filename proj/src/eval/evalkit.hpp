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
// Quantitative evaluation: NRMSE between population responses across levels
// and SNR conditions, envelope-following responses to SAM tones through a
// small CN/IC backend, and speech-shaped-noise generation and mixing.

#ifndef HACOMP_EVAL_EVALKIT_H_
#define HACOMP_EVAL_EVALKIT_H_

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dnn/model.hpp"
#include "periphery/periphery.hpp"

namespace hacomp {
namespace evalkit {

// RMSE between the two series divided by max of the reference. Returned as a
// fraction (0.01 == 1%).
double Nrmse(const std::vector<double>& r_nh, const std::vector<double>& r_hat);

struct SamStimulus {
  double duration_s = 0.4;
  double carrier_hz = 4000.0;
  double modulation_hz = 120.0;
  double depth = 1.0;       // 100%
  double ramp_s = 0.005;    // Hann ramps at both ends
  double level_db_spl = 70.0;
};

std::vector<double> SamTone(const SamStimulus& spec, double sample_rate_hz);

// Two cascaded excitation minus delayed-inhibition stages turning the AN
// population response into an EFR-like waveform. The nanovolt scale is a
// single nominal calibration constant; only ratios and directions carry
// meaning.
struct EfrBackendConfig {
  double cn_tau_exc_s = 0.0005;
  double cn_tau_inh_s = 0.002;
  double cn_delay_s = 0.001;
  double cn_inh_strength = 0.6;
  double cn_gain = 2.0;
  double ic_tau_exc_s = 0.001;
  double ic_tau_inh_s = 0.005;
  double ic_delay_s = 0.002;
  double ic_inh_strength = 0.9;
  double ic_gain = 2.0;
  double onset_skip_s = 0.05;  // drop the onset transient
  double analysis_s = 0.35;
  // Single nominal calibration constant, anchored so the normal-hearing
  // reference SAM response lands near 8.4 "nV" at the default configuration.
  // Absolute values are nominal; ratios and directions carry the meaning.
  double nv_per_unit = 7.4e-4;
  double noise_floor_nv = 0.25;
};

std::vector<double> CnIcResponse(const std::vector<double>& population_rate,
                                 double sample_rate_hz,
                                 const EfrBackendConfig& cfg);

struct EfrResult {
  double efr_sum_nv = 0;
  std::array<double, 4> harmonic_nv = {0, 0, 0, 0};  // fm, 2fm, 3fm, 4fm
};

// Spectral peaks at the modulation frequency and its next three harmonics
// (max magnitude within +/-2 bins of each target).
EfrResult Efr(const std::vector<double>& population_rate, double sample_rate_hz,
              double modulation_hz, const EfrBackendConfig& cfg);

// Noise whose long-term magnitude spectrum matches the corpus average
// (Welch, 2048-sample Hann frames, 50% overlap); random phases from `seed`.
std::vector<double> SsnFromCorpus(const std::vector<std::vector<double>>& corpus,
                                  int64_t length, uint64_t seed);

// Scales noise so 10 log10(rms_speech^2 / rms_noise^2) == snr_db, then sums.
// The noise must be at least as long as the speech.
std::vector<double> MixAtSnr(const std::vector<double>& speech,
                             const std::vector<double>& noise, double snr_db);

struct EvalConfig {
  std::string hi_profile = "Slope35+CS-7-0-0";
  std::string nh_profile = "NH";
  std::vector<double> levels_db = {30, 40, 50, 60, 70};
  std::vector<double> snrs_db;      // evaluated at 70 dB SPL
  bool with_efr = true;
  int64_t n_channels = 201;
  int64_t cf_step = 10;
  double cf_min_hz = 112.0;
  double cf_max_hz = 12000.0;
  int64_t window = 2048;
  uint64_t seed = 1;
  SamStimulus sam;
  EfrBackendConfig efr;
  periphery::PeripheryConfig periphery;
};

struct EvalRow {
  std::string sentence;
  std::string condition;  // e.g. "quiet_70dB", "snr_-6dB"
  double nrmse;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::map<std::string, double> aggregate_nrmse;  // mean per condition
  bool has_efr = false;
  double efr_nh_nv = 0;
  double efr_hi_unprocessed_nv = 0;
  double efr_hi_processed_nv = 0;
  double runtime_s = 0;
  std::string config_echo;  // JSON
};

// model == nullptr evaluates the unprocessed baseline. Sentences are raw
// (uncalibrated) waveforms at the periphery rate; names label report rows.
EvalReport Evaluate(dnn::ModelParams* model, const EvalConfig& cfg,
                    const std::vector<std::vector<double>>& sentences,
                    const std::vector<std::string>& names);

std::string ReportToJson(const EvalReport& report);
std::string ReportCsv(const EvalReport& report);          // one row per sentence x condition
std::string NrmseVsLevelCsv(const EvalReport& report);    // plot-ready series
std::string EfrCsv(const EvalReport& report);

// Simulated population response of `profile` to a sentence, via the shared
// context/padding plumbing; processes with the model first when given.
std::vector<double> PopulationForSentence(dnn::ModelParams* model,
                                          const std::vector<double>& sentence,
                                          const periphery::HearingProfile& profile,
                                          const periphery::CFMap& map,
                                          const std::vector<int64_t>& cf_subset,
                                          const periphery::PeripheryConfig& pcfg,
                                          int64_t window);

}  // namespace evalkit
}  // namespace hacomp

#endif  // HACOMP_EVAL_EVALKIT_H_
