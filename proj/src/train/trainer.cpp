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

#include "train/trainer.hpp"

#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include "core/ops.hpp"
#include "core/rng.hpp"

namespace hacomp {
namespace trainer {

TrainConfig TrainConfig::Desk() {
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.learning_rate = 2e-3;
  cfg.arch = dnn::ArchSpec::Desk();
  return cfg;
}

IngestConfig TrainConfig::ingest() const {
  IngestConfig ic;
  ic.sample_rate_hz = periphery.sample_rate_hz;
  ic.level_db_spl = level_db_spl;
  ic.context_left = periphery.context_left;
  ic.context_right = periphery.context_right;
  ic.total_len = 5 * periphery.block_size;  // 81,920 at the default block
  return ic;
}

ProcessedItem ProcessPadded(Tape* tape, dnn::ModelParams& model,
                            const std::vector<double>& waveform,
                            int64_t context_left, int64_t context_right,
                            int64_t window) {
  const int64_t total = static_cast<int64_t>(waveform.size());
  const int64_t core_len = total - context_left - context_right;
  Check(core_len > 0, "process: context exceeds the signal");
  Array full_const = Array::FromVector({total}, waveform);
  Array x_core = ops::SliceCols(nullptr, full_const, context_left, core_len);
  Array processed = dnn::ForwardWindowed(tape, model, x_core, window);
  Array spliced = ops::SpliceCols(tape, full_const, processed, context_left);
  return {spliced, processed, x_core};
}

std::vector<double> PadForSimulation(const std::vector<double>& sentence,
                                     const periphery::PeripheryConfig& pcfg) {
  const int64_t needed = pcfg.context_left + static_cast<int64_t>(sentence.size()) +
                         pcfg.context_right;
  const int64_t total =
      ((needed + pcfg.block_size - 1) / pcfg.block_size) * pcfg.block_size;
  std::vector<double> out(static_cast<size_t>(total), 0.0);
  std::copy(sentence.begin(), sentence.end(), out.begin() + pcfg.context_left);
  return out;
}

uint64_t PeripheryConfigHash(const periphery::PeripheryConfig& cfg) {
  unsigned char bytes[sizeof(cfg)];
  std::memcpy(bytes, &cfg, sizeof(cfg));
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

TrainResult Train(const TrainConfig& cfg, const std::vector<DatasetItem>& items) {
  Check(!items.empty(), "train: empty dataset");
  cfg.loss.Validate();
  const periphery::PeripheryConfig& pcfg = cfg.periphery;
  const periphery::CFMap map =
      periphery::GreenwoodCf(cfg.n_channels, cfg.cf_min_hz, cfg.cf_max_hz);
  const std::vector<int64_t> subset =
      periphery::SubsampleChannels(cfg.n_channels, cfg.cf_step);
  const periphery::HearingProfile nh = periphery::PresetProfile(cfg.nh_profile, map);
  const periphery::HearingProfile hi = periphery::PresetProfile(cfg.hi_profile, map);

  TrainResult result;
  result.model = dnn::Build(cfg.arch, cfg.seed);
  result.model.SetRequiresGrad(true);

  // The reference pathway sees the fixed unprocessed inputs: simulate once
  // and reuse across epochs.
  std::vector<Array> nh_rates;
  std::vector<std::vector<double>> cf_hz;
  nh_rates.reserve(items.size());
  for (const DatasetItem& item : items) {
    Array x = Array::FromVector({static_cast<int64_t>(item.waveform.size())},
                                item.waveform);
    periphery::Neurogram ng = periphery::Simulate(nullptr, x, nh, map, subset, pcfg);
    nh_rates.push_back(ng.rates);
    if (cf_hz.empty()) cf_hz.push_back(ng.cf_hz);
  }

  AdamState adam(cfg.learning_rate);
  Rng shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<size_t> order(items.size());
  std::iota(order.begin(), order.end(), size_t{0});

  for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.Shuffle(&order);
    double epoch_sum = 0;
    for (size_t pos = 0; pos < order.size(); ++pos) {
      const size_t idx = order[pos];
      const DatasetItem& item = items[idx];
      Tape tape;
      ProcessedItem proc =
          ProcessPadded(&tape, result.model, item.waveform, pcfg.context_left,
                        pcfg.context_right, cfg.window);
      periphery::Neurogram hi_ng =
          periphery::Simulate(&tape, proc.full, hi, map, subset, pcfg);

      losses::LossBundle bundle;
      bundle.x = proc.x_core;
      bundle.x_hat = proc.core;
      bundle.r = nh_rates[idx];
      bundle.r_hat = hi_ng.rates;
      bundle.cf_hz = cf_hz[0];
      bundle.sample_rate_hz = pcfg.sample_rate_hz;
      losses::ComposedLoss composed = losses::Compose(&tape, cfg.loss, bundle);

      const double total = composed.total.item();
      if (!std::isfinite(total)) {
        std::ostringstream os;
        os << "train: non-finite loss at epoch " << epoch << ", item " << idx
           << " (" << item.source_path << "):";
        for (const losses::TermValue& tv : composed.breakdown)
          os << " " << losses::KindName(tv.kind) << (tv.squared ? "^2" : "")
             << "=" << tv.raw;
        FailNumeric(os.str());
      }

      result.model.ZeroGrads();
      tape.Backward(composed.total);
      adam.Step(&result.model.params);

      result.log.push_back(
          {epoch, static_cast<int64_t>(idx), total, composed.breakdown});
      epoch_sum += total;
    }
    result.epoch_mean_loss.push_back(epoch_sum / static_cast<double>(items.size()));
  }
  return result;
}

std::string LossLogCsv(const std::vector<LogRow>& log) {
  std::ostringstream os;
  os << "epoch,item,total";
  if (!log.empty()) {
    for (const losses::TermValue& tv : log[0].terms)
      os << "," << losses::KindName(tv.kind) << (tv.squared ? "_sq" : "");
  }
  os << "\n";
  os.precision(17);
  for (const LogRow& row : log) {
    os << row.epoch << "," << row.item << "," << row.total;
    for (const losses::TermValue& tv : row.terms) os << "," << tv.weighted;
    os << "\n";
  }
  return os.str();
}

}  // namespace trainer
}  // namespace hacomp
