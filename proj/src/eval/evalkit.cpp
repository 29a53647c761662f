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

#include "eval/evalkit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "core/fft.hpp"
#include "core/ops.hpp"
#include "core/rng.hpp"
#include "train/dataset.hpp"
#include "train/trainer.hpp"

namespace hacomp {
namespace evalkit {

double Nrmse(const std::vector<double>& r_nh, const std::vector<double>& r_hat) {
  Check(r_nh.size() == r_hat.size() && !r_nh.empty(),
        "nrmse: responses must be non-empty and equally long");
  double peak = 0;
  double sq = 0;
  for (size_t i = 0; i < r_nh.size(); ++i) {
    peak = std::max(peak, r_nh[i]);
    const double d = r_nh[i] - r_hat[i];
    sq += d * d;
  }
  Check(peak > 0, "nrmse: reference response has non-positive maximum");
  return std::sqrt(sq / static_cast<double>(r_nh.size())) / peak;
}

std::vector<double> SamTone(const SamStimulus& spec, double sample_rate_hz) {
  const int64_t n = static_cast<int64_t>(spec.duration_s * sample_rate_hz);
  Check(n > 0, "sam_tone: empty stimulus");
  std::vector<double> x(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    const double tt = static_cast<double>(i) / sample_rate_hz;
    x[static_cast<size_t>(i)] =
        (1.0 + spec.depth * std::sin(2.0 * M_PI * spec.modulation_hz * tt)) *
        std::sin(2.0 * M_PI * spec.carrier_hz * tt);
  }
  // Hann ramps.
  const int64_t ramp = static_cast<int64_t>(spec.ramp_s * sample_rate_hz);
  for (int64_t i = 0; i < ramp && i < n; ++i) {
    const double w =
        0.5 - 0.5 * std::cos(M_PI * static_cast<double>(i) / static_cast<double>(ramp));
    x[static_cast<size_t>(i)] *= w;
    x[static_cast<size_t>(n - 1 - i)] *= w;
  }
  return trainer::Calibrate(x, spec.level_db_spl);
}

namespace {

std::vector<double> OnePole(const std::vector<double>& x, double tau_s, double fs) {
  const double alpha = 1.0 - std::exp(-1.0 / (tau_s * fs));
  std::vector<double> y(x.size());
  double state = x.empty() ? 0.0 : x[0];  // start at the initial value
  for (size_t i = 0; i < x.size(); ++i) {
    state += alpha * (x[i] - state);
    y[i] = state;
  }
  return y;
}

std::vector<double> ExcInhStage(const std::vector<double>& x, double fs,
                                double tau_exc, double tau_inh, double delay_s,
                                double inh_strength, double gain) {
  const std::vector<double> exc = OnePole(x, tau_exc, fs);
  const std::vector<double> inh = OnePole(x, tau_inh, fs);
  const int64_t d = static_cast<int64_t>(std::llround(delay_s * fs));
  std::vector<double> y(x.size(), 0.0);
  for (int64_t i = 0; i < static_cast<int64_t>(x.size()); ++i) {
    const double inh_v = i >= d ? inh[static_cast<size_t>(i - d)] : inh[0];
    y[static_cast<size_t>(i)] =
        gain * std::max(0.0, exc[static_cast<size_t>(i)] - inh_strength * inh_v);
  }
  return y;
}

}  // namespace

std::vector<double> CnIcResponse(const std::vector<double>& population_rate,
                                 double sample_rate_hz,
                                 const EfrBackendConfig& cfg) {
  std::vector<double> cn =
      ExcInhStage(population_rate, sample_rate_hz, cfg.cn_tau_exc_s,
                  cfg.cn_tau_inh_s, cfg.cn_delay_s, cfg.cn_inh_strength, cfg.cn_gain);
  return ExcInhStage(cn, sample_rate_hz, cfg.ic_tau_exc_s, cfg.ic_tau_inh_s,
                     cfg.ic_delay_s, cfg.ic_inh_strength, cfg.ic_gain);
}

EfrResult Efr(const std::vector<double>& population_rate, double sample_rate_hz,
              double modulation_hz, const EfrBackendConfig& cfg) {
  const std::vector<double> efr = CnIcResponse(population_rate, sample_rate_hz, cfg);
  const int64_t skip = static_cast<int64_t>(cfg.onset_skip_s * sample_rate_hz);
  const int64_t len = static_cast<int64_t>(cfg.analysis_s * sample_rate_hz);
  Check(skip + len <= static_cast<int64_t>(efr.size()),
        "efr: response shorter than the analysis window");
  std::vector<double> seg(efr.begin() + skip, efr.begin() + skip + len);
  double mean = 0;
  for (double v : seg) mean += v;
  mean /= static_cast<double>(seg.size());
  for (double& v : seg) v -= mean;

  std::vector<fft::Complex> spec = fft::ForwardReal(seg.data(), len);
  const double bin_hz = sample_rate_hz / static_cast<double>(len);
  EfrResult out;
  for (int h = 0; h < 4; ++h) {
    const double target = modulation_hz * (h + 1);
    const int64_t center = static_cast<int64_t>(std::llround(target / bin_hz));
    Check(center + 2 <= len / 2, "efr: harmonic bin out of range");
    double peak = 0;
    for (int64_t b = center - 2; b <= center + 2; ++b)
      if (b >= 0) peak = std::max(peak, std::abs(spec[static_cast<size_t>(b)]));
    const double amp_nv =
        peak * 2.0 / static_cast<double>(len) * cfg.nv_per_unit;
    out.harmonic_nv[static_cast<size_t>(h)] = amp_nv;
    out.efr_sum_nv += amp_nv;
  }
  return out;
}

std::vector<double> SsnFromCorpus(const std::vector<std::vector<double>>& corpus,
                                  int64_t length, uint64_t seed) {
  Check(!corpus.empty(), "ssn: empty corpus");
  Check(length >= 4, "ssn: length too short");
  constexpr int64_t kWin = 2048;
  constexpr int64_t kHop = 1024;
  std::vector<double> env(kWin / 2 + 1, 0.0);
  int64_t frames = 0;
  std::vector<double> window(kWin);
  for (int64_t i = 0; i < kWin; ++i)
    window[static_cast<size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / kWin);
  for (const std::vector<double>& s : corpus) {
    Check(static_cast<int64_t>(s.size()) >= kWin,
          "ssn: corpus sentence shorter than one analysis frame");
    for (int64_t f = 0; f + kWin <= static_cast<int64_t>(s.size()); f += kHop) {
      std::vector<double> frame(kWin);
      for (int64_t i = 0; i < kWin; ++i)
        frame[static_cast<size_t>(i)] =
            s[static_cast<size_t>(f + i)] * window[static_cast<size_t>(i)];
      std::vector<fft::Complex> spec = fft::ForwardReal(frame.data(), kWin);
      for (int64_t b = 0; b <= kWin / 2; ++b)
        env[static_cast<size_t>(b)] += std::norm(spec[static_cast<size_t>(b)]);
      ++frames;
    }
  }
  for (double& v : env) v = std::sqrt(v / static_cast<double>(frames));

  // Random-phase synthesis against the interpolated envelope.
  Rng rng(seed);
  const int64_t half = length / 2;
  std::vector<fft::Complex> spec(static_cast<size_t>(length), fft::Complex(0, 0));
  for (int64_t k = 1; k < half; ++k) {
    const double src = static_cast<double>(k) * kWin / static_cast<double>(length);
    const int64_t lo = std::min<int64_t>(kWin / 2 - 1, static_cast<int64_t>(src));
    const double frac = src - static_cast<double>(lo);
    const double mag = env[static_cast<size_t>(lo)] * (1.0 - frac) +
                       env[static_cast<size_t>(lo + 1)] * frac;
    const double phase = rng.NextUniform(0.0, 2.0 * M_PI);
    spec[static_cast<size_t>(k)] = std::polar(mag, phase);
    spec[static_cast<size_t>(length - k)] = std::conj(spec[static_cast<size_t>(k)]);
  }
  fft::Inverse(&spec);
  std::vector<double> noise(static_cast<size_t>(length));
  for (int64_t i = 0; i < length; ++i)
    noise[static_cast<size_t>(i)] = spec[static_cast<size_t>(i)].real() /
                                    static_cast<double>(length);
  return noise;
}

std::vector<double> MixAtSnr(const std::vector<double>& speech,
                             const std::vector<double>& noise, double snr_db) {
  Check(noise.size() >= speech.size(), "mix: noise shorter than speech");
  const double rms_s = trainer::Rms(speech);
  const double rms_n = trainer::Rms(noise.data(), static_cast<int64_t>(speech.size()));
  Check(rms_s > 0 && rms_n > 0, "mix: zero-energy input");
  const double scale = rms_s / (rms_n * std::pow(10.0, snr_db / 20.0));
  std::vector<double> out(speech.size());
  for (size_t i = 0; i < speech.size(); ++i) out[i] = speech[i] + noise[i] * scale;
  return out;
}

std::vector<double> PopulationForSentence(dnn::ModelParams* model,
                                          const std::vector<double>& sentence,
                                          const periphery::HearingProfile& profile,
                                          const periphery::CFMap& map,
                                          const std::vector<int64_t>& cf_subset,
                                          const periphery::PeripheryConfig& pcfg,
                                          int64_t window) {
  const std::vector<double> padded = trainer::PadForSimulation(sentence, pcfg);
  Array input;
  if (model) {
    trainer::ProcessedItem proc = trainer::ProcessPadded(
        nullptr, *model, padded, pcfg.context_left, pcfg.context_right, window);
    input = proc.full;
  } else {
    input = Array::FromVector({static_cast<int64_t>(padded.size())}, padded);
  }
  periphery::Neurogram ng =
      periphery::Simulate(nullptr, input, profile, map, cf_subset, pcfg);
  Array pop = periphery::PopulationResponse(nullptr, ng.rates);
  return pop.values();
}

// ---------------------------------------------------------------------------

namespace {

std::string ConditionLabel(bool quiet, double value) {
  std::ostringstream os;
  if (quiet) {
    os << "quiet_" << value << "dB";
  } else {
    os << "snr_" << value << "dB";
  }
  return os.str();
}

nlohmann::json ConfigEcho(const EvalConfig& cfg) {
  nlohmann::json j;
  j["hi_profile"] = cfg.hi_profile;
  j["nh_profile"] = cfg.nh_profile;
  j["levels_db"] = cfg.levels_db;
  j["snrs_db"] = cfg.snrs_db;
  j["with_efr"] = cfg.with_efr;
  j["n_channels"] = cfg.n_channels;
  j["cf_step"] = cfg.cf_step;
  j["window"] = cfg.window;
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace

EvalReport Evaluate(dnn::ModelParams* model, const EvalConfig& cfg,
                    const std::vector<std::vector<double>>& sentences,
                    const std::vector<std::string>& names) {
  Check(!sentences.empty(), "evaluate: no sentences");
  Check(sentences.size() == names.size(), "evaluate: names/sentences mismatch");
  const auto t0 = std::chrono::steady_clock::now();

  const periphery::CFMap map =
      periphery::GreenwoodCf(cfg.n_channels, cfg.cf_min_hz, cfg.cf_max_hz);
  const std::vector<int64_t> subset =
      periphery::SubsampleChannels(cfg.n_channels, cfg.cf_step);
  const periphery::HearingProfile nh = periphery::PresetProfile(cfg.nh_profile, map);
  const periphery::HearingProfile hi = periphery::PresetProfile(cfg.hi_profile, map);
  const double fs = cfg.periphery.sample_rate_hz;

  EvalReport report;
  report.config_echo = ConfigEcho(cfg).dump();

  auto add_row = [&](const std::string& name, const std::string& cond,
                     double value) {
    report.rows.push_back({name, cond, value});
  };

  // Levels in quiet.
  for (double level : cfg.levels_db) {
    for (size_t s = 0; s < sentences.size(); ++s) {
      const std::vector<double> cal = trainer::Calibrate(sentences[s], level);
      const std::vector<double> r_nh = PopulationForSentence(
          nullptr, cal, nh, map, subset, cfg.periphery, cfg.window);
      const std::vector<double> r_hi = PopulationForSentence(
          model, cal, hi, map, subset, cfg.periphery, cfg.window);
      add_row(names[s], ConditionLabel(true, level), Nrmse(r_nh, r_hi));
    }
  }

  // SNR conditions at 70 dB SPL with one seeded speech-shaped-noise
  // realization shared across conditions.
  if (!cfg.snrs_db.empty()) {
    size_t longest = 0;
    for (const auto& s : sentences) longest = std::max(longest, s.size());
    const std::vector<double> noise =
        SsnFromCorpus(sentences, static_cast<int64_t>(longest), cfg.seed);
    for (double snr : cfg.snrs_db) {
      for (size_t s = 0; s < sentences.size(); ++s) {
        const std::vector<double> cal = trainer::Calibrate(sentences[s], 70.0);
        const std::vector<double> noisy = MixAtSnr(cal, noise, snr);
        const std::vector<double> r_nh = PopulationForSentence(
            nullptr, noisy, nh, map, subset, cfg.periphery, cfg.window);
        const std::vector<double> r_hi = PopulationForSentence(
            model, noisy, hi, map, subset, cfg.periphery, cfg.window);
        add_row(names[s], ConditionLabel(false, snr), Nrmse(r_nh, r_hi));
      }
    }
  }

  for (const EvalRow& row : report.rows) {
    report.aggregate_nrmse[row.condition] += row.nrmse;
  }
  double per_condition = static_cast<double>(sentences.size());
  for (auto& [cond, sum] : report.aggregate_nrmse) sum /= per_condition;

  if (cfg.with_efr) {
    report.has_efr = true;
    const std::vector<double> sam = SamTone(cfg.sam, fs);
    auto pop = [&](dnn::ModelParams* m, const periphery::HearingProfile& p) {
      return PopulationForSentence(m, sam, p, map, subset, cfg.periphery,
                                   cfg.window);
    };
    report.efr_nh_nv =
        Efr(pop(nullptr, nh), fs, cfg.sam.modulation_hz, cfg.efr).efr_sum_nv;
    report.efr_hi_unprocessed_nv =
        Efr(pop(nullptr, hi), fs, cfg.sam.modulation_hz, cfg.efr).efr_sum_nv;
    report.efr_hi_processed_nv =
        model ? Efr(pop(model, hi), fs, cfg.sam.modulation_hz, cfg.efr).efr_sum_nv
              : report.efr_hi_unprocessed_nv;
  }

  report.runtime_s = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
  return report;
}

std::string ReportToJson(const EvalReport& report) {
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(report.config_echo);
  j["rows"] = nlohmann::json::array();
  for (const EvalRow& row : report.rows)
    j["rows"].push_back({{"sentence", row.sentence},
                         {"condition", row.condition},
                         {"nrmse", row.nrmse}});
  j["aggregate_nrmse"] = report.aggregate_nrmse;
  if (report.has_efr) {
    j["efr_nv"] = {{"nh", report.efr_nh_nv},
                   {"hi_unprocessed", report.efr_hi_unprocessed_nv},
                   {"hi_processed", report.efr_hi_processed_nv}};
  }
  j["runtime_s"] = report.runtime_s;
  return j.dump(2);
}

std::string ReportCsv(const EvalReport& report) {
  std::ostringstream os;
  os.precision(10);
  os << "sentence,condition,nrmse\n";
  for (const EvalRow& row : report.rows)
    os << row.sentence << "," << row.condition << "," << row.nrmse << "\n";
  return os.str();
}

std::string NrmseVsLevelCsv(const EvalReport& report) {
  std::ostringstream os;
  os.precision(10);
  os << "condition,mean_nrmse\n";
  for (const auto& [cond, value] : report.aggregate_nrmse)
    os << cond << "," << value << "\n";
  return os.str();
}

std::string EfrCsv(const EvalReport& report) {
  std::ostringstream os;
  os.precision(10);
  os << "pathway,efr_sum_nv\n";
  if (report.has_efr) {
    os << "nh," << report.efr_nh_nv << "\n";
    os << "hi_unprocessed," << report.efr_hi_unprocessed_nv << "\n";
    os << "hi_processed," << report.efr_hi_processed_nv << "\n";
  }
  return os.str();
}

}  // namespace evalkit
}  // namespace hacomp
