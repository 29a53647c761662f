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

#include "periphery/periphery.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <json.hpp>

#include "core/ops.hpp"

namespace hacomp {
namespace periphery {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Greenwood 1990 human constants.
constexpr double kGreenwoodA = 165.4;
constexpr double kGreenwoodAlpha = 2.1;
constexpr double kGreenwoodK = 0.88;

double OnePoleAlpha(double cutoff_hz, double fs) {
  return 1.0 - std::exp(-kTwoPi * cutoff_hz / fs);
}

}  // namespace

double GreenwoodFrequency(double x) {
  return kGreenwoodA * (std::pow(10.0, kGreenwoodAlpha * x) - kGreenwoodK);
}

double GreenwoodPosition(double f_hz) {
  return std::log10(f_hz / kGreenwoodA + kGreenwoodK) / kGreenwoodAlpha;
}

CFMap GreenwoodCf(int64_t n, double f_min_hz, double f_max_hz) {
  Check(n >= 2, "greenwood_cf: need at least 2 channels");
  Check(f_min_hz > 0 && f_min_hz < f_max_hz,
        "greenwood_cf: invalid frequency range");
  const double x0 = GreenwoodPosition(f_min_hz);
  const double x1 = GreenwoodPosition(f_max_hz);
  CFMap map;
  map.cf_hz.resize(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    const double x = x0 + (x1 - x0) * static_cast<double>(i) /
                              static_cast<double>(n - 1);
    map.cf_hz[static_cast<size_t>(i)] = GreenwoodFrequency(x);
  }
  // Pin the end points exactly.
  map.cf_hz.front() = f_min_hz;
  map.cf_hz.back() = f_max_hz;
  return map;
}

std::vector<double> SlopingAudiogram(double hl_at_8k_db, const CFMap& map) {
  Check(hl_at_8k_db >= 0, "sloping_audiogram: negative loss");
  std::vector<double> loss(map.cf_hz.size(), 0.0);
  for (size_t i = 0; i < map.cf_hz.size(); ++i) {
    const double f = map.cf_hz[i];
    if (f <= 1000.0) {
      loss[i] = 0.0;
    } else if (f <= 8000.0) {
      loss[i] = hl_at_8k_db * std::log2(f / 1000.0) / 3.0;
    } else {
      loss[i] = hl_at_8k_db;
    }
  }
  return loss;
}

namespace {

HearingProfile BaseProfile(const std::string& name, const CFMap& map) {
  HearingProfile p;
  p.name = name;
  p.ohc_loss_db.assign(map.cf_hz.size(), 0.0);
  if (name == "NH") {
  } else if (name == "Slope35") {
    p.ohc_loss_db = SlopingAudiogram(35.0, map);
  } else if (name == "Slope25") {
    p.ohc_loss_db = SlopingAudiogram(25.0, map);
  } else if (name == "Flat35") {
    p.ohc_loss_db.assign(map.cf_hz.size(), 35.0);
  } else if (name == "CS-7-0-0") {
    p.fibers_h = 7;
    p.fibers_m = 0;
    p.fibers_l = 0;
  } else if (name == "CS-13-0-0") {
    p.fibers_h = 13;
    p.fibers_m = 0;
    p.fibers_l = 0;
  } else {
    FailConfig("unknown hearing profile preset '" + name + "'");
  }
  return p;
}

}  // namespace

HearingProfile PresetProfile(const std::string& name, const CFMap& map) {
  const size_t plus = name.find('+');
  if (plus == std::string::npos) return BaseProfile(name, map);
  // "Audiogram+CS" composition: audiogram from the first part, fibre counts
  // from the second.
  HearingProfile a = BaseProfile(name.substr(0, plus), map);
  HearingProfile b = BaseProfile(name.substr(plus + 1), map);
  HearingProfile out = a;
  out.name = name;
  out.fibers_h = b.fibers_h;
  out.fibers_m = b.fibers_m;
  out.fibers_l = b.fibers_l;
  return out;
}

std::vector<std::string> PresetProfileNames() {
  return {"NH", "Slope35", "Slope25", "Flat35", "CS-7-0-0", "CS-13-0-0"};
}

std::string ProfileToJson(const HearingProfile& profile) {
  nlohmann::json j;
  j["name"] = profile.name;
  j["fiber_counts"] = {profile.fibers_h, profile.fibers_m, profile.fibers_l};
  j["ohc_loss_db"] = profile.ohc_loss_db;
  return j.dump(2);
}

HearingProfile ProfileFromJson(const std::string& json, const CFMap& map) {
  nlohmann::json j = nlohmann::json::parse(json);
  HearingProfile p;
  p.name = j.value("name", "custom");
  if (j.contains("fiber_counts")) {
    auto fc = j["fiber_counts"];
    Check(fc.size() == 3, "profile: fiber_counts must have 3 entries");
    p.fibers_h = fc[0].get<double>();
    p.fibers_m = fc[1].get<double>();
    p.fibers_l = fc[2].get<double>();
  }
  if (j.contains("ohc_loss_db")) {
    p.ohc_loss_db = j["ohc_loss_db"].get<std::vector<double>>();
    Check(p.ohc_loss_db.size() == map.cf_hz.size(),
          "profile: ohc_loss_db length " + std::to_string(p.ohc_loss_db.size()) +
              " != channel count " + std::to_string(map.cf_hz.size()));
  } else if (j.contains("audiogram")) {
    auto ag = j["audiogram"];
    const std::string kind = ag.value("kind", "sloping");
    if (kind == "sloping") {
      p.ohc_loss_db = SlopingAudiogram(ag.value("hl_at_8k_db", 0.0), map);
    } else if (kind == "flat") {
      p.ohc_loss_db.assign(map.cf_hz.size(), ag.value("hl_db", 0.0));
    } else {
      Fail("profile: unknown audiogram kind '" + kind + "'");
    }
  } else {
    p.ohc_loss_db.assign(map.cf_hz.size(), 0.0);
  }
  for (double v : p.ohc_loss_db)
    Check(v >= 0.0, "profile: ohc_loss_db must be non-negative");
  Check(p.fibers_h >= 0 && p.fibers_m >= 0 && p.fibers_l >= 0,
        "profile: fiber counts must be non-negative");
  return p;
}

// ---------------------------------------------------------------------------
// middle ear

namespace {

// First-order bilinear-transform sections combined into one biquad:
// high-pass at me_highpass_hz times low-pass at me_lowpass_hz, scaled to unit
// gain at 1 kHz.
void MiddleEarCoeffs(const PeripheryConfig& cfg, double coeffs[5]) {
  const double th = std::tan(M_PI * cfg.me_highpass_hz / cfg.sample_rate_hz);
  const double tl = std::tan(M_PI * cfg.me_lowpass_hz / cfg.sample_rate_hz);
  const double ah = (1.0 - th) / (1.0 + th);
  const double al = (1.0 - tl) / (1.0 + tl);
  const double gh = 1.0 / (1.0 + th);
  const double gl = tl / (1.0 + tl);
  // num: gh*gl*(1, 0, -1), den: (1, -(ah+al), ah*al)
  coeffs[0] = gh * gl;
  coeffs[1] = 0.0;
  coeffs[2] = -gh * gl;
  coeffs[3] = -(ah + al);
  coeffs[4] = ah * al;
}

double BiquadGainAt(const double c[5], double f_hz, double fs) {
  const std::complex<double> z =
      std::exp(std::complex<double>(0.0, -kTwoPi * f_hz / fs));
  const std::complex<double> num = c[0] + c[1] * z + c[2] * z * z;
  const std::complex<double> den = 1.0 + c[3] * z + c[4] * z * z;
  return std::abs(num / den);
}

}  // namespace

double MiddleEarGainAt(double f_hz, const PeripheryConfig& cfg) {
  double c[5];
  MiddleEarCoeffs(cfg, c);
  const double ref = BiquadGainAt(c, 1000.0, cfg.sample_rate_hz);
  return BiquadGainAt(c, f_hz, cfg.sample_rate_hz) / ref;
}

Array MiddleEar(Tape* t, const Array& signal, const PeripheryConfig& cfg) {
  Check(signal.rank() == 1, "middle_ear: expects a 1-D signal");
  double c[5];
  MiddleEarCoeffs(cfg, c);
  const double ref = BiquadGainAt(c, 1000.0, cfg.sample_rate_hz);
  std::vector<double> coeffs{c[0] / ref, c[1] / ref, c[2] / ref, c[3], c[4]};
  return ops::BiquadCascade(t, signal, coeffs, 1);
}

// ---------------------------------------------------------------------------
// cochlea

namespace {

// Slaney-style all-pole gammatone: `order` identical two-pole sections, each
// normalized to unit gain at CF.
void GammatoneCoeffs(double cf_hz, const PeripheryConfig& cfg,
                     std::vector<double>* out) {
  const double erb = cfg.erb_min_bw + cf_hz / cfg.erb_q;
  const double bw = kTwoPi * cfg.erb_scale * erb;
  const double rho = std::exp(-bw / cfg.sample_rate_hz);
  const double theta = kTwoPi * cf_hz / cfg.sample_rate_hz;
  const double a1 = -2.0 * rho * std::cos(theta);
  const double a2 = rho * rho;
  const std::complex<double> z =
      std::exp(std::complex<double>(0.0, -theta));
  const double b0 = std::abs(1.0 + a1 * z + a2 * z * z);
  for (int64_t s = 0; s < cfg.gammatone_order; ++s) {
    out->push_back(b0);
    out->push_back(0.0);
    out->push_back(0.0);
    out->push_back(a1);
    out->push_back(a2);
  }
}

}  // namespace

Array CochlearStage(Tape* t, const Array& me_signal,
                    const std::vector<double>& ohc_loss_db, const CFMap& map,
                    const PeripheryConfig& cfg) {
  const int64_t n = map.channels();
  Check(static_cast<int64_t>(ohc_loss_db.size()) == n,
        "cochlear_stage: ohc_loss_db length != channel count");
  Check(cfg.compression_exponent > 0 && cfg.compression_exponent <= 1,
        "cochlear_stage: compression exponent must be in (0, 1]");

  std::vector<double> coeffs;
  coeffs.reserve(static_cast<size_t>(n * cfg.gammatone_order * 5));
  for (int64_t ch = 0; ch < n; ++ch)
    GammatoneCoeffs(map.cf_hz[static_cast<size_t>(ch)], cfg, &coeffs);

  Array rows = ops::RepeatRows(t, me_signal, n);
  Array bm = ops::BiquadCascade(t, rows, std::move(coeffs), cfg.gammatone_order);

  // Envelope: lowpassed instantaneous power, floored for smoothness.
  Array env2 = ops::OnePoleLowpass(
      t, ops::Square(t, bm), OnePoleAlpha(cfg.envelope_lp_hz, cfg.sample_rate_hz));
  Array env = ops::Sqrt(
      t, ops::AddConst(t, env2, cfg.envelope_floor * cfg.envelope_floor));

  // c(e) = (1 + (e/knee)^2)^((gamma-1)/2): 1 at rest, compressive above knee.
  Array c = ops::PowConst(
      t,
      ops::AddConst(t, ops::Square(t, ops::Scale(t, env, 1.0 / cfg.compression_knee)),
                    1.0),
      0.5 * (cfg.compression_exponent - 1.0));

  // Active-path strength per channel, OHC loss taken off the top.
  std::vector<double> active(static_cast<size_t>(n));
  const double a_max = std::pow(10.0, cfg.max_active_gain_db / 20.0) - 1.0;
  for (int64_t ch = 0; ch < n; ++ch) {
    const double loss = std::min(ohc_loss_db[static_cast<size_t>(ch)],
                                 cfg.max_active_gain_db);
    active[static_cast<size_t>(ch)] = a_max * std::pow(10.0, -loss / 20.0);
  }
  Array gain = ops::AddConst(t, ops::ScaleRows(t, c, active), 1.0);
  return ops::Mul(t, bm, gain);
}

// ---------------------------------------------------------------------------
// IHC

namespace {

double IhcRectifier(double v, const PeripheryConfig& cfg) {
  const double z = (v - cfg.ihc_half_level) / cfg.ihc_softplus_scale;
  const double sp = std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
  return cfg.ihc_softplus_scale * sp;
}

}  // namespace

double IhcRestingOutput(const PeripheryConfig& cfg) {
  return IhcRectifier(0.0, cfg);
}

Array IhcStage(Tape* t, const Array& bm, const PeripheryConfig& cfg) {
  const double rest = IhcRestingOutput(cfg);
  Array z = ops::Affine(t, bm, 1.0 / cfg.ihc_softplus_scale,
                        -cfg.ihc_half_level / cfg.ihc_softplus_scale);
  Array pot = ops::Scale(t, ops::Softplus(t, z), cfg.ihc_softplus_scale);
  // Lowpass the deviation from rest so silence stays at rest exactly.
  Array dev = ops::AddConst(t, pot, -rest);
  Array lp = ops::OnePoleLowpass(t, dev,
                                 OnePoleAlpha(cfg.ihc_lowpass_hz, cfg.sample_rate_hz));
  return ops::AddConst(t, lp, rest);
}

// ---------------------------------------------------------------------------
// ANF

namespace {

double RateLevel(double drive, Fiber fiber, const PeripheryConfig& cfg) {
  const int f = static_cast<int>(fiber);
  const double z = (drive - cfg.anf_thresh[f]) / cfg.anf_width[f];
  const double sig = 0.5 * (1.0 + z / std::sqrt(1.0 + z * z));
  return cfg.anf_sr[f] + (cfg.anf_sat[f] - cfg.anf_sr[f]) * sig;
}

}  // namespace

double AnfRestingRate(Fiber fiber, const PeripheryConfig& cfg) {
  const double rest_rate = RateLevel(0.0, fiber, cfg);
  // Smooth rectifier at the output shifts the value by a vanishing amount.
  const double eps = cfg.rate_floor_eps;
  return 0.5 * (rest_rate + std::sqrt(rest_rate * rest_rate + eps * eps));
}

Array AnfStage(Tape* t, const Array& ihc, Fiber fiber,
               const PeripheryConfig& cfg) {
  const int f = static_cast<int>(fiber);
  Check(cfg.adapt_fast_tau_s > 0 && cfg.adapt_slow_tau_s > 0,
        "anf_stage: adaptation time constants must be positive");
  const double rest_pot = IhcRestingOutput(cfg);
  const double rest_rate = RateLevel(0.0, fiber, cfg);

  // Sigmoidal rate-level drive on the IHC deviation from rest; algebraic
  // tails keep the saturation gradient alive.
  Array z = ops::Affine(t, ihc, 1.0 / cfg.anf_width[f],
                        -(rest_pot + cfg.anf_thresh[f]) / cfg.anf_width[f]);
  Array rate = ops::Affine(t, ops::AlgebraicSigmoid(t, z),
                           cfg.anf_sat[f] - cfg.anf_sr[f], cfg.anf_sr[f]);

  // Fast + slow adaptation on the driven part; the onset passes through
  // before the lowpasses charge, the steady state sits at
  // (1 - fast - slow) of the drive above rest.
  Array driven = ops::AddConst(t, rate, -rest_rate);
  const double alpha_f =
      1.0 - std::exp(-1.0 / (cfg.adapt_fast_tau_s * cfg.sample_rate_hz));
  const double alpha_s =
      1.0 - std::exp(-1.0 / (cfg.adapt_slow_tau_s * cfg.sample_rate_hz));
  Array lp_f = ops::OnePoleLowpass(t, driven, alpha_f);
  Array lp_s = ops::OnePoleLowpass(t, driven, alpha_s);
  Array adapted =
      ops::LinComb3(t, driven, lp_f, lp_s, 1.0, -cfg.adapt_fast_strength,
                    -cfg.adapt_slow_strength, rest_rate);
  return ops::SmoothRelu(t, adapted, cfg.rate_floor_eps);
}

Array AnSum(Tape* t, const Array& r_h, const Array& r_m, const Array& r_l,
            double h, double m, double l) {
  return ops::LinComb3(t, r_h, r_m, r_l, h, m, l, 0.0);
}

Array PopulationResponse(Tape* t, const Array& neurogram) {
  return ops::Reduce(t, neurogram, 0, ops::ReduceKind::kSum);
}

std::vector<int64_t> SubsampleChannels(int64_t n, int64_t step) {
  std::vector<int64_t> idx;
  for (int64_t i = 0; i < n; i += step) idx.push_back(i);
  return idx;
}

Neurogram Simulate(Tape* t, const Array& signal, const HearingProfile& profile,
                   const CFMap& map, const std::vector<int64_t>& cf_subset,
                   const PeripheryConfig& cfg) {
  Check(signal.rank() == 1, "simulate: expects a 1-D signal");
  const int64_t len = signal.dim(0);
  Check(len > 0 && len % cfg.block_size == 0,
        "simulate: input length " + std::to_string(len) +
            " is not a multiple of the block size " +
            std::to_string(cfg.block_size));
  Check(len > cfg.context_left + cfg.context_right,
        "simulate: input shorter than the required context");
  Check(static_cast<int64_t>(profile.ohc_loss_db.size()) == map.channels(),
        "simulate: profile channel count != map channel count");

  // Channels are independent; simulating only the requested subset is
  // equivalent to simulating all and selecting rows.
  CFMap sub_map;
  std::vector<double> sub_loss;
  if (cf_subset.empty()) {
    sub_map = map;
    sub_loss = profile.ohc_loss_db;
  } else {
    for (int64_t idx : cf_subset) {
      Check(idx >= 0 && idx < map.channels(),
            "simulate: cf_subset index " + std::to_string(idx) +
                " out of range");
      sub_map.cf_hz.push_back(map.cf_hz[static_cast<size_t>(idx)]);
      sub_loss.push_back(profile.ohc_loss_db[static_cast<size_t>(idx)]);
    }
  }

  Array me = MiddleEar(t, signal, cfg);
  Array bm = CochlearStage(t, me, sub_loss, sub_map, cfg);
  Array ihc = IhcStage(t, bm, cfg);
  Array r_h = AnfStage(t, ihc, Fiber::kHigh, cfg);
  Array r_m = AnfStage(t, ihc, Fiber::kMedium, cfg);
  Array r_l = AnfStage(t, ihc, Fiber::kLow, cfg);
  Array summed =
      AnSum(t, r_h, r_m, r_l, profile.fibers_h, profile.fibers_m, profile.fibers_l);

  Neurogram out;
  out.rates = ops::SliceCols(t, summed, cfg.context_left,
                             len - cfg.context_left - cfg.context_right);
  out.cf_hz = sub_map.cf_hz;
  out.sample_rate_hz = cfg.sample_rate_hz;
  return out;
}

}  // namespace periphery
}  // namespace hacomp
