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
// Dataset ingestion: resample to the model rate, calibrate to a target SPL
// (reference pressure 20 uPa), and zero-pad into the fixed training layout of
// context_left leading zeros, the sentence, and trailing zeros up to
// total_len.

#ifndef HACOMP_TRAIN_DATASET_H_
#define HACOMP_TRAIN_DATASET_H_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace hacomp {
namespace trainer {

constexpr double kReferencePressurePa = 2e-5;

inline double SplToRmsPa(double spl_db) {
  return kReferencePressurePa * std::pow(10.0, spl_db / 20.0);
}

struct IngestConfig {
  double sample_rate_hz = 20000.0;
  double level_db_spl = 70.0;
  int64_t context_left = 7936;
  int64_t context_right = 256;
  int64_t total_len = 81920;
};

struct DatasetItem {
  std::vector<double> waveform;  // total_len samples, pascals, padded
  std::string source_path;
  int64_t sentence_start = 0;    // == context_left
  int64_t sentence_len = 0;      // samples at the model rate
  double duration_s = 0;
  double level_db_spl = 0;
};

// Scale to the target RMS; the signal must carry energy.
std::vector<double> Calibrate(const std::vector<double>& x, double level_db_spl);

// Build an item from raw samples already at the model rate.
DatasetItem MakeItem(std::vector<double> sentence, const std::string& source,
                     const IngestConfig& cfg);

// Read + resample + calibrate + pad a mono WAV file.
DatasetItem Ingest(const std::string& path, const IngestConfig& cfg);

// All .wav files under `dir` (sorted by name), capped at max_items when > 0.
std::vector<DatasetItem> IngestDir(const std::string& dir,
                                   const IngestConfig& cfg, int64_t max_items);

// White-noise augmentation: mixes seeded white noise over each sentence
// region at an SNR drawn uniformly from [snr_lo, snr_hi] dB. The noisy item
// replaces the clean one (the same input feeds both periphery pathways).
// An infinite SNR leaves the item unchanged.
void AddNoiseTraining(std::vector<DatasetItem>* items, double snr_lo_db,
                      double snr_hi_db, uint64_t seed);

double Rms(const std::vector<double>& x);
double Rms(const double* x, int64_t n);

}  // namespace trainer
}  // namespace hacomp

#endif  // HACOMP_TRAIN_DATASET_H_
