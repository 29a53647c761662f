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

#include "losses/losses.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <json.hpp>

#include "core/ops.hpp"

namespace hacomp {
namespace losses {

std::string KindName(Kind k) {
  switch (k) {
    case Kind::kTimeChannels: return "time_channels";
    case Kind::kTimePopulation: return "time_population";
    case Kind::kStftChannels: return "stft_channels";
    case Kind::kStftPopulation: return "stft_population";
    case Kind::kStimulusHighfreq: return "stimulus_highfreq";
  }
  Fail("unreachable loss kind");
}

Kind KindFromName(const std::string& name) {
  if (name == "time_channels") return Kind::kTimeChannels;
  if (name == "time_population") return Kind::kTimePopulation;
  if (name == "stft_channels") return Kind::kStftChannels;
  if (name == "stft_population") return Kind::kStftPopulation;
  if (name == "stimulus_highfreq") return Kind::kStimulusHighfreq;
  Fail("unknown loss kind '" + name + "'");
}

void LossSpec::Validate() const {
  Check(!terms.empty(), "loss spec: needs at least one term");
  for (const LossTerm& term : terms) {
    Check(term.weight > 0, "loss spec: weights must be positive");
    if (term.complex_stft) {
      Check(term.kind == Kind::kStftChannels || term.kind == Kind::kStftPopulation,
            "loss spec: complex_stft only applies to stft terms");
      Check(!term.squared, "loss spec: complex_stft excludes squared");
    }
  }
  Check(stft_window >= 2 && stft_hop >= 1, "loss spec: bad stft window/hop");
}

// ---------------------------------------------------------------------------
// presets

namespace {

LossSpec BasePreset(const std::string& name) {
  LossSpec s;
  s.name = name;
  auto term = [](Kind k, bool sq, double w) {
    LossTerm t;
    t.kind = k;
    t.squared = sq;
    t.weight = w;
    return t;
  };
  const Kind R = Kind::kStftChannels, RP = Kind::kStftPopulation;
  const Kind TR = Kind::kTimeChannels, TP = Kind::kTimePopulation;
  const Kind X = Kind::kStimulusHighfreq;
  if (name == "L_r") {
    s.terms = {term(TR, false, 1.0), term(X, false, 0.5)};
  } else if (name == "L_rR") {
    s.terms = {term(TR, false, 1.0), term(X, false, 0.5), term(R, false, 0.1)};
  } else if (name == "L_rrp") {
    s.terms = {term(TR, false, 1.0), term(X, false, 0.5), term(TP, false, 0.1)};
  } else if (name == "L_rrpRp") {
    s.terms = {term(TR, false, 1.0), term(X, false, 0.5), term(TP, false, 0.1),
               term(RP, false, 0.02)};
  } else if (name == "L_r2") {
    s.terms = {term(TR, true, 1.0), term(X, false, 40.0)};
  } else if (name == "L_r2R2") {
    s.terms = {term(TR, true, 1.0), term(X, false, 40.0), term(R, true, 0.0014)};
  } else if (name == "L_r2rp2") {
    s.terms = {term(TR, true, 1.0), term(X, false, 40.0), term(TP, true, 0.08)};
  } else if (name == "L_r2rp2Rp2") {
    s.terms = {term(TR, true, 1.0), term(X, false, 40.0), term(TP, true, 0.08),
               term(RP, true, 1e-5)};
  } else {
    FailConfig("unknown loss preset '" + name + "'");
  }
  return s;
}

}  // namespace

LossSpec Preset(const std::string& name) {
  // Split "base+mod1+mod2".
  std::vector<std::string> parts;
  size_t pos = 0;
  while (pos <= name.size()) {
    const size_t next = name.find('+', pos);
    if (next == std::string::npos) {
      parts.push_back(name.substr(pos));
      break;
    }
    parts.push_back(name.substr(pos, next - pos));
    pos = next + 1;
  }
  LossSpec s = BasePreset(parts[0]);
  for (size_t i = 1; i < parts.size(); ++i) {
    const std::string& mod = parts[i];
    if (mod == "Tx") {
      s.stimulus_threshold = StimulusThreshold{};
    } else if (mod == "Tr") {
      s.response_threshold = ResponseThreshold{};
    } else if (mod == "emph") {
      s.freq_emphasis = FreqEmphasis{};
    } else if (mod == "cplx") {
      for (LossTerm& term : s.terms)
        if (term.kind == Kind::kStftChannels || term.kind == Kind::kStftPopulation) {
          Check(!term.squared, "complex STFT modifier requires non-squared spectra");
          term.complex_stft = true;
        }
    } else {
      FailConfig("unknown loss modifier '" + mod + "'");
    }
  }
  s.name = name;
  s.Validate();
  return s;
}

std::vector<std::string> PresetNames() {
  return {"L_r", "L_rR", "L_rrp", "L_rrpRp", "L_r2", "L_r2R2", "L_r2rp2",
          "L_r2rp2Rp2"};
}

std::string LossSpecToJson(const LossSpec& spec) {
  nlohmann::json j;
  j["name"] = spec.name;
  j["stft_window"] = spec.stft_window;
  j["stft_hop"] = spec.stft_hop;
  j["highfreq_cutoff_hz"] = spec.highfreq_cutoff_hz;
  j["terms"] = nlohmann::json::array();
  for (const LossTerm& t : spec.terms) {
    j["terms"].push_back({{"kind", KindName(t.kind)},
                          {"squared", t.squared},
                          {"complex_stft", t.complex_stft},
                          {"weight", t.weight}});
  }
  if (spec.freq_emphasis)
    j["freq_emphasis"] = {{"max_attenuation", spec.freq_emphasis->max_attenuation}};
  if (spec.response_threshold)
    j["response_threshold"] = {{"fraction", spec.response_threshold->fraction},
                               {"rms_win", spec.response_threshold->rms_win},
                               {"extrema_win", spec.response_threshold->extrema_win}};
  if (spec.stimulus_threshold)
    j["stimulus_threshold"] = {{"rms_win", spec.stimulus_threshold->rms_win},
                               {"fraction", spec.stimulus_threshold->fraction}};
  return j.dump(2);
}

LossSpec LossSpecFromJson(const std::string& json) {
  nlohmann::json j = nlohmann::json::parse(json);
  LossSpec s;
  s.name = j.value("name", "custom");
  s.stft_window = j.value("stft_window", int64_t{2048});
  s.stft_hop = j.value("stft_hop", int64_t{1024});
  s.highfreq_cutoff_hz = j.value("highfreq_cutoff_hz", 8000.0);
  for (const auto& tj : j.at("terms")) {
    LossTerm t;
    t.kind = KindFromName(tj.at("kind").get<std::string>());
    t.squared = tj.value("squared", false);
    t.complex_stft = tj.value("complex_stft", false);
    t.weight = tj.at("weight").get<double>();
    s.terms.push_back(t);
  }
  if (j.contains("freq_emphasis")) {
    FreqEmphasis fe;
    fe.max_attenuation = j["freq_emphasis"].value("max_attenuation", 0.62);
    s.freq_emphasis = fe;
  }
  if (j.contains("response_threshold")) {
    ResponseThreshold rt;
    rt.fraction = j["response_threshold"].value("fraction", 0.4);
    rt.rms_win = j["response_threshold"].value("rms_win", int64_t{51});
    rt.extrema_win = j["response_threshold"].value("extrema_win", int64_t{1001});
    s.response_threshold = rt;
  }
  if (j.contains("stimulus_threshold")) {
    StimulusThreshold st;
    st.rms_win = j["stimulus_threshold"].value("rms_win", int64_t{101});
    st.fraction = j["stimulus_threshold"].value("fraction", 0.01);
    s.stimulus_threshold = st;
  }
  s.Validate();
  return s;
}

// ---------------------------------------------------------------------------
// terms

Array LossR(Tape* t, const Array& r, const Array& r_hat, bool squared,
            const std::vector<double>& cf_weights,
            const std::vector<double>& mask) {
  Check(r.shape() == r_hat.shape(), "loss_r: shape mismatch " +
                                        ShapeToString(r.shape()) + " vs " +
                                        ShapeToString(r_hat.shape()));
  Array a = squared ? ops::Square(t, r) : r;
  Array b = squared ? ops::Square(t, r_hat) : r_hat;
  return ops::MaskedMae(t, a, b, cf_weights, mask);
}

namespace {

Array Population(Tape* t, const Array& r, bool squared) {
  Array base = squared ? ops::Square(t, r) : r;
  return ops::Reduce(t, base, 0, ops::ReduceKind::kSum);
}

}  // namespace

Array LossRp(Tape* t, const Array& r, const Array& r_hat, bool squared,
             const std::vector<double>& time_mask) {
  Check(r.shape() == r_hat.shape(), "loss_rp: shape mismatch");
  Array p = Population(t, r, squared);
  Array p_hat = Population(t, r_hat, squared);
  return ops::MaskedMae(t, p, p_hat, {}, time_mask);
}

Array LossStftChannels(Tape* t, const Array& r, const Array& r_hat,
                       bool squared, bool complex_out, int64_t window,
                       int64_t hop) {
  Check(r.shape() == r_hat.shape(), "loss_stft: shape mismatch");
  Array s = ops::StftMag(t, r, window, hop, squared, complex_out);
  Array s_hat = ops::StftMag(t, r_hat, window, hop, squared, complex_out);
  return ops::Mae(t, s, s_hat);
}

Array LossStftPopulation(Tape* t, const Array& r, const Array& r_hat,
                         bool squared, bool complex_out, int64_t window,
                         int64_t hop) {
  Check(r.shape() == r_hat.shape(), "loss_stft_population: shape mismatch");
  // Population of the raw responses; `squared` applies to the magnitudes.
  Array p = Population(t, r, false);
  Array p_hat = Population(t, r_hat, false);
  Array s = ops::StftMag(t, p, window, hop, squared, complex_out);
  Array s_hat = ops::StftMag(t, p_hat, window, hop, squared, complex_out);
  return ops::Mae(t, s, s_hat);
}

Array LossXHighfreq(Tape* t, const Array& x, const Array& x_hat,
                    double cutoff_hz, double sample_rate_hz) {
  Check(x.rank() == 1 && x_hat.rank() == 1, "loss_x: expects 1-D signals");
  Check(x.size() == x_hat.size(),
        "loss_x: length mismatch " + std::to_string(x.size()) + " vs " +
            std::to_string(x_hat.size()));
  const int64_t n = x.size();
  Array mag = ops::FftMag(t, x);
  Array mag_hat = ops::FftMag(t, x_hat);
  // First bin strictly above the cutoff.
  int64_t k0 = static_cast<int64_t>(std::floor(cutoff_hz * n / sample_rate_hz)) + 1;
  const int64_t bins = n / 2 + 1;
  if (k0 >= bins) return Array::Scalar(0.0);
  Array hi = ops::SliceCols(t, mag, k0, bins - k0);
  Array hi_hat = ops::SliceCols(t, mag_hat, k0, bins - k0);
  return ops::Mae(t, hi, hi_hat);
}

// ---------------------------------------------------------------------------
// modifiers

std::vector<double> FreqEmphasisWeights(const std::vector<double>& cf_hz,
                                        double max_attenuation) {
  Check(max_attenuation >= 0 && max_attenuation < 1,
        "freq_emphasis: max_attenuation must be in [0, 1)");
  Check(!cf_hz.empty(), "freq_emphasis: empty CF list");
  const double f_lo = cf_hz.front();
  const double f_hi = cf_hz.back();
  const double f_mid = std::sqrt(f_lo * f_hi);
  // z-score 5.5 at the extremes keeps each endpoint within half a percent of
  // its target.
  const double scale = std::max(std::log(f_hi / f_mid) / 5.5, 1e-9);
  std::vector<double> w(cf_hz.size());
  for (size_t i = 0; i < cf_hz.size(); ++i) {
    const double z = (std::log(cf_hz[i]) - std::log(f_mid)) / scale;
    const double sig = 1.0 / (1.0 + std::exp(-z));
    w[i] = 1.0 - max_attenuation * sig;
  }
  return w;
}

std::vector<double> MovingRms(const std::vector<double>& x, int64_t win) {
  Check(win >= 1 && win % 2 == 1, "moving_rms: window must be odd and positive");
  const int64_t n = static_cast<int64_t>(x.size());
  const int64_t h = win / 2;
  std::vector<double> prefix(static_cast<size_t>(n) + 1, 0.0);
  for (int64_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i] * x[i];
  std::vector<double> out(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    const int64_t lo = std::max<int64_t>(0, i - h);
    const int64_t hi = std::min<int64_t>(n - 1, i + h);
    const double mean = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
    out[i] = std::sqrt(std::max(mean, 0.0));
  }
  return out;
}

namespace {

template <bool kMax>
std::vector<double> MovingExtremum(const std::vector<double>& x, int64_t win) {
  Check(win >= 1 && win % 2 == 1, "moving extremum: window must be odd");
  const int64_t n = static_cast<int64_t>(x.size());
  const int64_t h = win / 2;
  std::vector<double> out(static_cast<size_t>(n));
  std::deque<int64_t> dq;  // indices, extremum at the front
  int64_t added = -1;
  for (int64_t i = 0; i < n; ++i) {
    const int64_t hi = std::min<int64_t>(n - 1, i + h);
    while (added < hi) {
      ++added;
      while (!dq.empty() && (kMax ? x[dq.back()] <= x[added]
                                  : x[dq.back()] >= x[added]))
        dq.pop_back();
      dq.push_back(added);
    }
    const int64_t lo = std::max<int64_t>(0, i - h);
    while (dq.front() < lo) dq.pop_front();
    out[i] = x[dq.front()];
  }
  return out;
}

}  // namespace

std::vector<double> MovingMax(const std::vector<double>& x, int64_t win) {
  return MovingExtremum<true>(x, win);
}

std::vector<double> MovingMin(const std::vector<double>& x, int64_t win) {
  return MovingExtremum<false>(x, win);
}

std::vector<double> ResponseThresholdMask(const std::vector<double>& r,
                                          int64_t channels, int64_t time,
                                          const ResponseThreshold& cfg) {
  Check(static_cast<int64_t>(r.size()) == channels * time,
        "response_threshold: element count mismatch");
  Check(cfg.rms_win <= time && cfg.extrema_win <= time,
        "response_threshold: window exceeds the response length");
  std::vector<double> mask(r.size(), 0.0);
  for (int64_t c = 0; c < channels; ++c) {
    std::vector<double> row(r.begin() + c * time, r.begin() + (c + 1) * time);
    const std::vector<double> rms = MovingRms(row, cfg.rms_win);
    const std::vector<double> rmax = MovingMax(rms, cfg.extrema_win);
    const std::vector<double> rmin = MovingMin(rms, cfg.extrema_win);
    for (int64_t i = 0; i < time; ++i) {
      const double thr = cfg.fraction * (rmax[i] - rmin[i]) + rmin[i];
      // Strict: a constant response masks everything out.
      if (row[i] > thr) mask[c * time + i] = 1.0;
    }
  }
  return mask;
}

std::vector<double> StimulusThresholdMask(const std::vector<double>& x,
                                          const StimulusThreshold& cfg) {
  Check(cfg.rms_win % 2 == 1, "stimulus_threshold: window must be odd");
  const std::vector<double> rms = MovingRms(x, cfg.rms_win);
  const double peak = *std::max_element(rms.begin(), rms.end());
  std::vector<double> mask(x.size(), 0.0);
  if (peak == 0.0) return mask;  // all-zero signal: all-false by convention
  const double thr = cfg.fraction * peak;
  for (size_t i = 0; i < x.size(); ++i)
    if (rms[i] >= thr) mask[i] = 1.0;
  return mask;
}

// ---------------------------------------------------------------------------
// composition

ComposedLoss Compose(Tape* t, const LossSpec& spec, const LossBundle& bundle) {
  spec.Validate();
  Check(bundle.r.shape() == bundle.r_hat.shape(), "compose: response shape mismatch");
  Check(bundle.x.size() == bundle.x_hat.size(), "compose: stimulus length mismatch");
  int64_t channels = bundle.r.rank() == 2 ? bundle.r.dim(0) : 1;
  int64_t time = bundle.r.rank() == 2 ? bundle.r.dim(1) : bundle.r.dim(0);

  std::vector<double> cf_weights;
  if (spec.freq_emphasis) {
    Check(static_cast<int64_t>(bundle.cf_hz.size()) == channels,
          "compose: cf_hz does not match the response rows");
    cf_weights = FreqEmphasisWeights(bundle.cf_hz, spec.freq_emphasis->max_attenuation);
  }

  // Time mask from the unprocessed stimulus; channel mask from the reference
  // response. Both gate the time-domain terms only.
  std::vector<double> time_mask;
  if (spec.stimulus_threshold) {
    Check(bundle.x.size() == time,
          "compose: stimulus threshold needs x aligned with the response time axis");
    time_mask = StimulusThresholdMask(bundle.x.values(), *spec.stimulus_threshold);
  }
  std::vector<double> channel_mask;
  if (spec.response_threshold) {
    channel_mask = ResponseThresholdMask(bundle.r.values(), channels, time,
                                         *spec.response_threshold);
  }
  // Combined per-element mask for the channel loss.
  std::vector<double> r_mask = channel_mask;
  if (!time_mask.empty()) {
    if (r_mask.empty()) {
      r_mask = time_mask;  // broadcast over rows by MaskedMae
    } else {
      for (int64_t c = 0; c < channels; ++c)
        for (int64_t i = 0; i < time; ++i) r_mask[c * time + i] *= time_mask[i];
    }
  }

  ComposedLoss out;
  Array total = Array::Scalar(0.0);
  for (const LossTerm& term : spec.terms) {
    Array raw;
    switch (term.kind) {
      case Kind::kTimeChannels:
        raw = LossR(t, bundle.r, bundle.r_hat, term.squared, cf_weights, r_mask);
        break;
      case Kind::kTimePopulation:
        raw = LossRp(t, bundle.r, bundle.r_hat, term.squared, time_mask);
        break;
      case Kind::kStftChannels:
        raw = LossStftChannels(t, bundle.r, bundle.r_hat, term.squared,
                               term.complex_stft, spec.stft_window, spec.stft_hop);
        break;
      case Kind::kStftPopulation:
        raw = LossStftPopulation(t, bundle.r, bundle.r_hat, term.squared,
                                 term.complex_stft, spec.stft_window,
                                 spec.stft_hop);
        break;
      case Kind::kStimulusHighfreq:
        raw = LossXHighfreq(t, bundle.x, bundle.x_hat, spec.highfreq_cutoff_hz,
                            bundle.sample_rate_hz);
        break;
    }
    Array weighted = ops::Scale(t, raw, term.weight);
    total = ops::Add(t, total, weighted);
    out.breakdown.push_back(
        {term.kind, term.squared, term.weight, raw.item(), weighted.item()});
  }
  out.total = total;
  return out;
}

}  // namespace losses
}  // namespace hacomp
