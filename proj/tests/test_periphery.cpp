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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/kernels.hpp"
#include "core/ops.hpp"
#include "core/rng.hpp"
#include "periphery/periphery.hpp"
#include "support/oracles.hpp"

using namespace hacomp;
using namespace hacomp::periphery;

namespace {

std::vector<double> Tone(double f_hz, double spl_db, int64_t n, double fs) {
  const double amp = 2e-5 * std::pow(10.0, spl_db / 20.0) * std::sqrt(2.0);
  std::vector<double> x(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i)
    x[static_cast<size_t>(i)] = amp * std::sin(2.0 * M_PI * f_hz * i / fs);
  return x;
}

double SteadyRms(const Array& a, int64_t row) {
  const int64_t t = a.dim(1);
  double s = 0;
  for (int64_t i = t / 2; i < t; ++i) {
    const double v = a.data()[row * t + i];
    s += v * v;
  }
  return std::sqrt(s / static_cast<double>(t - t / 2));
}

}  // namespace

TEST_CASE("greenwood map hits the requested endpoints") {
  CFMap map = GreenwoodCf(201, 112.0, 12000.0);
  REQUIRE(map.channels() == 201);
  CHECK(map.cf_hz.front() == 112.0);
  CHECK(map.cf_hz.back() == 12000.0);
  for (size_t i = 1; i < map.cf_hz.size(); ++i)
    CHECK(map.cf_hz[i] > map.cf_hz[i - 1]);
}

TEST_CASE("greenwood n=2 gives exactly the endpoints") {
  CFMap map = GreenwoodCf(2, 200.0, 8000.0);
  CHECK(map.cf_hz == std::vector<double>{200.0, 8000.0});
}

TEST_CASE("interior CFs match a direct evaluation of the Greenwood formula") {
  // Independent recomputation with the published constants.
  const double A = 165.4, alpha = 2.1, k = 0.88;
  auto pos = [&](double f) { return std::log10(f / A + k) / alpha; };
  auto freq = [&](double x) { return A * (std::pow(10.0, alpha * x) - k); };
  CFMap map = GreenwoodCf(21, 112.0, 12000.0);
  const double x0 = pos(112.0), x1 = pos(12000.0);
  for (int64_t i = 1; i < 20; ++i) {
    const double want = freq(x0 + (x1 - x0) * i / 20.0);
    CHECK(map.cf_hz[static_cast<size_t>(i)] ==
          doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("sloping audiograms reproduce the published anchor values") {
  CFMap anchors;
  anchors.cf_hz = {500.0, 1000.0, 2000.0, 4000.0, 6000.0, 8000.0, 10000.0};
  std::vector<double> s35 = SlopingAudiogram(35.0, anchors);
  CHECK(s35[0] == 0.0);
  CHECK(s35[1] == 0.0);
  CHECK(s35[2] == doctest::Approx(11.66).epsilon(0.001));
  CHECK(s35[3] == doctest::Approx(23.33).epsilon(0.001));
  CHECK(s35[4] == doctest::Approx(30.16).epsilon(0.001));
  CHECK(s35[5] == doctest::Approx(35.0));
  CHECK(s35[6] == doctest::Approx(35.0));

  std::vector<double> s25 = SlopingAudiogram(25.0, anchors);
  CHECK(s25[2] == doctest::Approx(8.33).epsilon(0.001));
  CHECK(s25[3] == doctest::Approx(16.66).epsilon(0.001));
  CHECK(s25[4] == doctest::Approx(21.54).epsilon(0.001));
}

TEST_CASE("profile presets and JSON round trip") {
  CFMap map = GreenwoodCf(21, 112.0, 12000.0);
  HearingProfile p = PresetProfile("Slope35+CS-7-0-0", map);
  CHECK(p.fibers_h == 7);
  CHECK(p.fibers_m == 0);
  CHECK(p.fibers_l == 0);
  CHECK(p.ohc_loss_db.back() == doctest::Approx(35.0));

  HearingProfile rt = ProfileFromJson(ProfileToJson(p), map);
  CHECK(rt.ohc_loss_db == p.ohc_loss_db);
  CHECK(rt.fibers_h == p.fibers_h);

  HearingProfile cs = PresetProfile("CS-13-0-0", map);
  CHECK(cs.fibers_h == 13);
  CHECK(cs.fibers_m == 0);
  for (double v : cs.ohc_loss_db) CHECK(v == 0.0);

  HearingProfile flat = PresetProfile("Flat35", map);
  for (double v : flat.ohc_loss_db) CHECK(v == 35.0);

  CHECK_THROWS_AS(PresetProfile("Slope99", map), hacomp::ConfigError);
}

TEST_CASE("middle ear: zero in, zero out; linear to 1e-12") {
  PeripheryConfig cfg;
  Array zero = Array::Zeros({512});
  Array out = MiddleEar(nullptr, zero, cfg);
  for (double v : out.values()) CHECK(v == 0.0);

  Rng rng(4);
  std::vector<double> xv(512);
  for (auto& v : xv) v = rng.NextUniform(-1, 1);
  Array x = Array::FromVector({512}, xv);
  Array fx = MiddleEar(nullptr, x, cfg);
  Array ax = MiddleEar(nullptr, ops::Scale(nullptr, x, 3.7), cfg);
  for (int64_t i = 0; i < 512; ++i)
    CHECK(ax.values()[i] == doctest::Approx(3.7 * fx.values()[i]).epsilon(1e-12));
}

TEST_CASE("middle ear steady-state tone gain matches the analytic response") {
  PeripheryConfig cfg;
  for (double f : {300.0, 1000.0, 2500.0, 6000.0}) {
    const int64_t n = 8192;
    std::vector<double> x = Tone(f, 70.0, n, cfg.sample_rate_hz);
    Array out = MiddleEar(nullptr, Array::FromVector({n}, x), cfg);
    double in_rms = 0, out_rms = 0;
    for (int64_t i = n / 2; i < n; ++i) {
      in_rms += x[static_cast<size_t>(i)] * x[static_cast<size_t>(i)];
      out_rms += out.values()[static_cast<size_t>(i)] * out.values()[static_cast<size_t>(i)];
    }
    const double gain = std::sqrt(out_rms / in_rms);
    CHECK(gain == doctest::Approx(MiddleEarGainAt(f, cfg)).epsilon(5e-3));
  }
  // Band-pass shape: midband above the skirts.
  CHECK(MiddleEarGainAt(1200.0, PeripheryConfig{}) > MiddleEarGainAt(100.0, PeripheryConfig{}));
  CHECK(MiddleEarGainAt(1200.0, PeripheryConfig{}) > MiddleEarGainAt(9000.0, PeripheryConfig{}));
}

TEST_CASE("cochlear stage: zero loss equals the NH output exactly") {
  PeripheryConfig cfg;
  CFMap map;
  map.cf_hz = {500.0, 2000.0, 8000.0};
  Rng rng(9);
  std::vector<double> xv(4096);
  for (auto& v : xv) v = 0.01 * rng.NextUniform(-1, 1);
  Array me = MiddleEar(nullptr, Array::FromVector({4096}, xv), cfg);
  Array nh = CochlearStage(nullptr, me, {0, 0, 0}, map, cfg);
  Array hi = CochlearStage(nullptr, me, {0, 0, 0}, map, cfg);
  CHECK(nh.values() == hi.values());
}

TEST_CASE("35 dB OHC loss attenuates a low-level on-CF tone by 35 +/- 1 dB") {
  PeripheryConfig cfg;
  CFMap map;
  map.cf_hz = {2000.0};
  const int64_t n = 8192;
  Array me = MiddleEar(nullptr,
                       Array::FromVector({n}, Tone(2000.0, 20.0, n, cfg.sample_rate_hz)),
                       cfg);
  Array nh = CochlearStage(nullptr, me, {0.0}, map, cfg);
  Array hi = CochlearStage(nullptr, me, {35.0}, map, cfg);
  const double drop_db = 20.0 * std::log10(SteadyRms(nh, 0) / SteadyRms(hi, 0));
  CHECK(drop_db == doctest::Approx(35.0).epsilon(1.0 / 35.0));
}

TEST_CASE("cochlear growth is monotone and compressive") {
  PeripheryConfig cfg;
  CFMap map;
  map.cf_hz = {2000.0};
  const int64_t n = 8192;
  double prev_rms = 0;
  double min_slope = 1e9, max_slope = -1e9;
  for (double spl = 20; spl <= 90; spl += 10) {
    Array me = MiddleEar(
        nullptr, Array::FromVector({n}, Tone(2000.0, spl, n, cfg.sample_rate_hz)), cfg);
    Array bm = CochlearStage(nullptr, me, {0.0}, map, cfg);
    const double rms = SteadyRms(bm, 0);
    if (prev_rms > 0) {
      const double slope = 20.0 * std::log10(rms / prev_rms) / 10.0;
      CHECK(rms > prev_rms);  // monotone growth
      min_slope = std::min(min_slope, slope);
      max_slope = std::max(max_slope, slope);
    }
    prev_rms = rms;
  }
  CHECK(min_slope < 1.0);  // compressive region present
  CHECK(min_slope > 0.0);
}

TEST_CASE("ihc: zero input gives the constant resting output") {
  PeripheryConfig cfg;
  Array zero = Array::Zeros({2, 600});
  Array out = IhcStage(nullptr, zero, cfg);
  const double rest = IhcRestingOutput(cfg);
  for (double v : out.values()) CHECK(v == doctest::Approx(rest).epsilon(1e-12));
}

TEST_CASE("ihc 4 kHz tone: DC dominates and AC is attenuated per the lowpass") {
  PeripheryConfig cfg;
  const double fs = cfg.sample_rate_hz;
  const int64_t n = 4000;  // integer cycles of 4 kHz at 20 kHz
  // Synthetic BM drive at 4 kHz.
  std::vector<double> bm(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) bm[static_cast<size_t>(i)] = 0.8 * std::sin(2.0 * M_PI * 4000.0 * i / fs);
  Array out = IhcStage(nullptr, Array::FromVector({1, n}, bm), cfg);

  // Oracle: recompute the rectifier directly and compare AC transfer through
  // the lowpass against its analytic response.
  auto rectify = [&](double v) {
    const double z = (v - cfg.ihc_half_level) / cfg.ihc_softplus_scale;
    return cfg.ihc_softplus_scale * (std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z))));
  };
  std::vector<double> pot(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) pot[static_cast<size_t>(i)] = rectify(bm[static_cast<size_t>(i)]);

  auto bin_amp = [&](const std::vector<double>& s, double f) {
    // Single-bin DFT amplitude over the steady half.
    double re = 0, im = 0;
    int64_t count = 0;
    for (int64_t i = n / 2; i < n; ++i, ++count) {
      re += s[static_cast<size_t>(i)] * std::cos(2.0 * M_PI * f * i / fs);
      im -= s[static_cast<size_t>(i)] * std::sin(2.0 * M_PI * f * i / fs);
    }
    return 2.0 * std::hypot(re, im) / static_cast<double>(count);
  };
  const double ac_in = bin_amp(pot, 4000.0);
  std::vector<double> outv(out.values());
  const double ac_out = bin_amp(outv, 4000.0);
  const double alpha = 1.0 - std::exp(-2.0 * M_PI * cfg.ihc_lowpass_hz / fs);
  const std::complex<double> z =
      std::exp(std::complex<double>(0, -2.0 * M_PI * 4000.0 / fs));
  const double h = std::abs(alpha / (1.0 - (1.0 - alpha) * z));
  CHECK(ac_out / ac_in == doctest::Approx(h).epsilon(1e-3));

  // DC (mean above rest) dominates the residual carrier-rate AC.
  double mean = 0;
  for (int64_t i = n / 2; i < n; ++i) mean += outv[static_cast<size_t>(i)];
  mean /= static_cast<double>(n - n / 2);
  CHECK(mean - IhcRestingOutput(cfg) > 1.2 * ac_out);
}

TEST_CASE("ihc output is monotone in the input envelope") {
  PeripheryConfig cfg;
  const int64_t n = 2000;
  double prev = -1;
  for (double amp : {0.05, 0.2, 0.8, 2.0}) {
    std::vector<double> bm(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i)
      bm[static_cast<size_t>(i)] = amp * std::sin(2.0 * M_PI * 1000.0 * i / cfg.sample_rate_hz);
    Array out = IhcStage(nullptr, Array::FromVector({1, n}, bm), cfg);
    double mean = 0;
    for (int64_t i = n / 2; i < n; ++i) mean += out.values()[static_cast<size_t>(i)];
    CHECK(mean > prev);
    prev = mean;
  }
}

TEST_CASE("anf: silence yields the constant resting rate of each fibre type") {
  PeripheryConfig cfg;
  Array silence = Array::Full({1, 400}, IhcRestingOutput(cfg));
  for (Fiber f : {Fiber::kHigh, Fiber::kMedium, Fiber::kLow}) {
    Array r = AnfStage(nullptr, silence, f, cfg);
    const double rest = AnfRestingRate(f, cfg);
    for (double v : r.values()) CHECK(v == doctest::Approx(rest).epsilon(1e-12));
  }
  // Resting rates track the configured spontaneous rates.
  CHECK(AnfRestingRate(Fiber::kHigh, cfg) == doctest::Approx(cfg.anf_sr[0]).epsilon(0.1));
  CHECK(AnfRestingRate(Fiber::kLow, cfg) < 1.0);
}

TEST_CASE("anf step onset overshoots and matches a direct recursion oracle") {
  PeripheryConfig cfg;
  const double fs = cfg.sample_rate_hz;
  const int64_t n = 4000;
  const double rest_pot = IhcRestingOutput(cfg);
  std::vector<double> drive(static_cast<size_t>(n), rest_pot);
  for (int64_t i = n / 4; i < n; ++i) drive[static_cast<size_t>(i)] = rest_pot + 0.6;
  Array out = AnfStage(nullptr, Array::FromVector({1, n}, drive), Fiber::kHigh, cfg);

  // Independent discrete simulation of the same stage definition.
  auto sigmoid = [](double z) { return 0.5 * (1.0 + z / std::sqrt(1.0 + z * z)); };
  auto rate_level = [&](double d) {
    return cfg.anf_sr[0] + (cfg.anf_sat[0] - cfg.anf_sr[0]) *
                               sigmoid((d - cfg.anf_thresh[0]) / cfg.anf_width[0]);
  };
  const double rest_rate = rate_level(0.0);
  const double af = 1.0 - std::exp(-1.0 / (cfg.adapt_fast_tau_s * fs));
  const double as = 1.0 - std::exp(-1.0 / (cfg.adapt_slow_tau_s * fs));
  double lf = 0, ls = 0;
  std::vector<double> want(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    const double driven = rate_level(drive[static_cast<size_t>(i)] - rest_pot) - rest_rate;
    lf += af * (driven - lf);
    ls += as * (driven - ls);
    const double u = rest_rate + driven - cfg.adapt_fast_strength * lf -
                     cfg.adapt_slow_strength * ls;
    want[static_cast<size_t>(i)] =
        0.5 * (u + std::sqrt(u * u + cfg.rate_floor_eps * cfg.rate_floor_eps));
  }
  for (int64_t i = 0; i < n; ++i)
    CHECK(out.values()[static_cast<size_t>(i)] ==
          doctest::Approx(want[static_cast<size_t>(i)]).epsilon(1e-12));

  // Onset overshoot relative to the adapted steady state.
  double peak = 0;
  for (double v : out.values()) peak = std::max(peak, v);
  const double steady = out.values()[static_cast<size_t>(n - 1)];
  CHECK(peak > 1.3 * steady);
}

TEST_CASE("low-SR fibres stay near rest where high-SR fibres are driven") {
  PeripheryConfig cfg;
  const int64_t n = 2000;
  const double rest_pot = IhcRestingOutput(cfg);
  // Drive well above the H threshold but under the L threshold.
  Array ihc = Array::Full({1, n}, rest_pot + 0.45);
  Array rh = AnfStage(nullptr, ihc, Fiber::kHigh, cfg);
  Array rl = AnfStage(nullptr, ihc, Fiber::kLow, cfg);
  const double h_rest = AnfRestingRate(Fiber::kHigh, cfg);
  const double l_rest = AnfRestingRate(Fiber::kLow, cfg);
  CHECK(rh.values().back() > h_rest + 30.0);
  CHECK(rl.values().back() < l_rest + 0.02 * cfg.anf_sat[2]);
}

TEST_CASE("an_sum composes fibre responses linearly") {
  Array rho = Array::Full({3, 5}, 2.0);
  Array sum = AnSum(nullptr, rho, rho, rho, 13, 3, 3);
  for (double v : sum.values()) CHECK(v == doctest::Approx(19 * 2.0));

  Rng rng(3);
  std::vector<double> hv(15);
  for (auto& v : hv) v = rng.NextUniform(0, 100);
  Array rh = Array::FromVector({3, 5}, hv);
  Array zero = Array::Zeros({3, 5});
  Array seven = AnSum(nullptr, rh, zero, zero, 7, 0, 0);
  for (int64_t i = 0; i < 15; ++i)
    CHECK(seven.values()[static_cast<size_t>(i)] ==
          doctest::Approx(7 * hv[static_cast<size_t>(i)]).epsilon(1e-15));

  Array nothing = AnSum(nullptr, rh, rh, rh, 0, 0, 0);
  for (double v : nothing.values()) CHECK(v == 0.0);

  // CS affinity: population response scales exactly with the count.
  Array thirteen = AnSum(nullptr, rh, zero, zero, 13, 0, 0);
  Array p7 = PopulationResponse(nullptr, seven);
  Array p13 = PopulationResponse(nullptr, thirteen);
  for (int64_t i = 0; i < 5; ++i)
    CHECK(p7.values()[static_cast<size_t>(i)] ==
          doctest::Approx(p13.values()[static_cast<size_t>(i)] * 7.0 / 13.0).epsilon(1e-12));
}

TEST_CASE("population response is the CF-axis sum") {
  Array ones = Array::Full({21, 7}, 1.0);
  Array pop = PopulationResponse(nullptr, ones);
  REQUIRE(pop.size() == 7);
  for (double v : pop.values()) CHECK(v == 21.0);
  Array viaops = ops::Reduce(nullptr, ones, 0, ops::ReduceKind::kSum);
  CHECK(pop.values() == viaops.values());
}

TEST_CASE("simulate: lengths, channel subset, silence rates") {
  PeripheryConfig cfg;
  CFMap map = GreenwoodCf(201, 112.0, 12000.0);
  HearingProfile nh = PresetProfile("NH", map);
  Array silence = Array::Zeros({81920});
  std::vector<int64_t> subset = SubsampleChannels(201, 10);
  CHECK(subset.size() == 21);
  Neurogram ng = Simulate(nullptr, silence, nh, map, subset, cfg);
  CHECK(ng.rates.dim(0) == 21);
  CHECK(ng.rates.dim(1) == 73728);
  const double want = 13 * AnfRestingRate(Fiber::kHigh, cfg) +
                      3 * AnfRestingRate(Fiber::kMedium, cfg) +
                      3 * AnfRestingRate(Fiber::kLow, cfg);
  for (int64_t c = 0; c < 21; ++c) {
    CHECK(ng.rates.data()[c * 73728] == doctest::Approx(want).epsilon(1e-12));
    CHECK(ng.rates.data()[c * 73728 + 73727] == doctest::Approx(want).epsilon(1e-12));
  }

  CHECK_THROWS_WITH_AS(Simulate(nullptr, Array::Zeros({81000}), nh, map, subset, cfg),
                       doctest::Contains("block size"), hacomp::Error);
}

TEST_CASE("simulate is deterministic and serial matches parallel bitwise") {
  PeripheryConfig cfg;
  cfg.block_size = 4096;
  cfg.context_left = 512;
  cfg.context_right = 128;
  CFMap map = GreenwoodCf(11, 200.0, 8000.0);
  HearingProfile nh = PresetProfile("NH", map);
  Rng rng(77);
  std::vector<double> xv(4096);
  for (auto& v : xv) v = 0.02 * rng.NextUniform(-1, 1);
  Array x = Array::FromVector({4096}, xv);

  kernels::SetParallel(true);
  Neurogram a = Simulate(nullptr, x, nh, map, {}, cfg);
  Neurogram b = Simulate(nullptr, x, nh, map, {}, cfg);
  CHECK(a.rates.values() == b.rates.values());

  kernels::SetParallel(false);
  Neurogram c = Simulate(nullptr, x, nh, map, {}, cfg);
  kernels::SetParallel(true);
  CHECK(a.rates.values() == c.rates.values());
}

TEST_CASE("rates are non-negative for arbitrary inputs") {
  PeripheryConfig cfg;
  cfg.block_size = 4096;
  cfg.context_left = 512;
  cfg.context_right = 128;
  CFMap map = GreenwoodCf(5, 200.0, 8000.0);
  HearingProfile nh = PresetProfile("NH", map);
  Rng rng(5);
  std::vector<double> xv(4096);
  for (auto& v : xv) v = 0.5 * rng.NextUniform(-1, 1);
  Neurogram ng = Simulate(nullptr, Array::FromVector({4096}, xv), nh, map, {}, cfg);
  for (double v : ng.rates.values()) CHECK(v >= 0.0);
}

TEST_CASE("increasing OHC loss never increases a low-level on-CF response") {
  PeripheryConfig cfg;
  CFMap map;
  map.cf_hz = {2000.0};
  const int64_t n = 8192;
  Array me = MiddleEar(nullptr,
                       Array::FromVector({n}, Tone(2000.0, 30.0, n, cfg.sample_rate_hz)),
                       cfg);
  double prev = 1e18;
  for (double loss : {0.0, 5.0, 15.0, 25.0, 35.0}) {
    Array bm = CochlearStage(nullptr, me, {loss}, map, cfg);
    const double rms = SteadyRms(bm, 0);
    CHECK(rms <= prev);
    prev = rms;
  }
}

TEST_CASE("gradient flows from the summed response back to the stimulus") {
  PeripheryConfig cfg;
  cfg.block_size = 1024;
  cfg.context_left = 256;
  cfg.context_right = 0;
  CFMap map;
  map.cf_hz = {800.0, 3000.0};
  HearingProfile nh;
  nh.name = "NH";
  nh.ohc_loss_db = {0.0, 0.0};

  Rng rng(15);
  std::vector<double> xv(2048);
  for (auto& v : xv) v = 0.05 * rng.NextUniform(-1, 1);

  auto loss_at = [&](const std::vector<double>& q, Tape* tape, Array* leaf) {
    Array x = Array::FromVector({2048}, q, tape != nullptr);
    if (leaf) *leaf = x;
    Neurogram ng = Simulate(tape, x, nh, map, {}, cfg);
    return ops::MeanAll(tape, ng.rates);
  };

  Tape tape;
  Array x;
  Array loss = loss_at(xv, &tape, &x);
  tape.Backward(loss);
  auto f = [&](const std::vector<double>& q) {
    return loss_at(q, nullptr, nullptr).item();
  };
  std::vector<size_t> coords{300, 700, 1100, 1500};
  CHECK(oracles::MaxGradRelErr(f, xv, x.grad(), coords, 1e-5) < 1e-4);
}
