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
// Closed-loop training: per item, crop the context, process the core with
// the model in fixed windows, re-attach the original context, simulate the
// reference periphery on the unprocessed input and the impaired periphery on
// the processed one, compose the loss, and update the model with Adam. The
// periphery is analytic and owns no trainable state; only model parameters
// move.

#ifndef HACOMP_TRAIN_TRAINER_H_
#define HACOMP_TRAIN_TRAINER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dnn/model.hpp"
#include "losses/losses.hpp"
#include "periphery/periphery.hpp"
#include "train/dataset.hpp"

namespace hacomp {
namespace trainer {

struct TrainConfig {
  losses::LossSpec loss = losses::Preset("L_r2rp2Rp2+Tx");
  std::string hi_profile = "Slope35+CS-7-0-0";
  std::string nh_profile = "NH";
  int64_t epochs = 60;
  double learning_rate = 1e-4;
  uint64_t seed = 1;
  int64_t n_channels = 201;
  int64_t cf_step = 10;  // 21 of 201
  double cf_min_hz = 112.0;
  double cf_max_hz = 12000.0;
  double level_db_spl = 70.0;
  int64_t window = 2048;
  dnn::ArchSpec arch = dnn::ArchSpec::Default();
  periphery::PeripheryConfig periphery;

  // Small setup that trains in minutes on a laptop CPU: 3+3 layers,
  // 5 epochs, a higher learning rate to compensate for the short schedule.
  static TrainConfig Desk();

  IngestConfig ingest() const;
};

struct LogRow {
  int64_t epoch;
  int64_t item;
  double total;
  std::vector<losses::TermValue> terms;
};

struct TrainResult {
  dnn::ModelParams model;
  std::vector<LogRow> log;
  std::vector<double> epoch_mean_loss;
};

TrainResult Train(const TrainConfig& cfg, const std::vector<DatasetItem>& items);

// Loss log as CSV: epoch, item, total, then one column per term.
std::string LossLogCsv(const std::vector<LogRow>& log);

// Crop the context, process in windows, splice the processed core back over
// the original context. When `tape` records, gradients flow into the model
// through the core. Returns the full-length processed stimulus and the
// core pair used by the stimulus-domain loss.
struct ProcessedItem {
  Array full;    // context + processed core
  Array core;    // processed core
  Array x_core;  // unprocessed core (constant)
};
ProcessedItem ProcessPadded(Tape* tape, dnn::ModelParams& model,
                            const std::vector<double>& waveform,
                            int64_t context_left, int64_t context_right,
                            int64_t window);

// Zero-pad a sentence into the periphery's context layout, rounding the
// total up to a block multiple.
std::vector<double> PadForSimulation(const std::vector<double>& sentence,
                                     const periphery::PeripheryConfig& pcfg);

// FNV-1a over the periphery constants, for frozen-parameter checks.
uint64_t PeripheryConfigHash(const periphery::PeripheryConfig& cfg);

}  // namespace trainer
}  // namespace hacomp

#endif  // HACOMP_TRAIN_TRAINER_H_
