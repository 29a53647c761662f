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

#include "train/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "core/common.hpp"
#include "core/rng.hpp"
#include "train/wav.hpp"

namespace hacomp {
namespace trainer {

double Rms(const double* x, int64_t n) {
  double s = 0;
  for (int64_t i = 0; i < n; ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(n));
}

double Rms(const std::vector<double>& x) {
  return Rms(x.data(), static_cast<int64_t>(x.size()));
}

std::vector<double> Calibrate(const std::vector<double>& x, double level_db_spl) {
  const double rms = Rms(x);
  CheckData(rms > 0, "calibrate: signal has no energy");
  const double scale = SplToRmsPa(level_db_spl) / rms;
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] * scale;
  return out;
}

DatasetItem MakeItem(std::vector<double> sentence, const std::string& source,
                     const IngestConfig& cfg) {
  const int64_t len = static_cast<int64_t>(sentence.size());
  CheckData(len > 0, "ingest: empty sentence from " + source);
  CheckData(cfg.context_left + len + cfg.context_right <= cfg.total_len,
        "ingest: sentence of " + std::to_string(len) +
            " samples plus context exceeds the total length " +
            std::to_string(cfg.total_len) + " (" + source + ")");
  std::vector<double> calibrated = Calibrate(sentence, cfg.level_db_spl);
  DatasetItem item;
  item.waveform.assign(static_cast<size_t>(cfg.total_len), 0.0);
  std::copy(calibrated.begin(), calibrated.end(),
            item.waveform.begin() + cfg.context_left);
  item.source_path = source;
  item.sentence_start = cfg.context_left;
  item.sentence_len = len;
  item.duration_s = static_cast<double>(len) / cfg.sample_rate_hz;
  item.level_db_spl = cfg.level_db_spl;
  return item;
}

DatasetItem Ingest(const std::string& path, const IngestConfig& cfg) {
  wav::WavData data = wav::Read(path);
  std::vector<double> sentence =
      wav::Resample(data.samples, data.sample_rate_hz, cfg.sample_rate_hz);
  return MakeItem(std::move(sentence), path, cfg);
}

std::vector<DatasetItem> IngestDir(const std::string& dir,
                                   const IngestConfig& cfg, int64_t max_items) {
  namespace fs = std::filesystem;
  CheckData(fs::is_directory(dir), "corpus directory not found: " + dir);
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav")
      paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  CheckData(!paths.empty(), "no .wav files in corpus directory: " + dir);
  if (max_items > 0 && static_cast<int64_t>(paths.size()) > max_items)
    paths.resize(static_cast<size_t>(max_items));
  std::vector<DatasetItem> items;
  items.reserve(paths.size());
  for (const std::string& p : paths) items.push_back(Ingest(p, cfg));
  return items;
}

void AddNoiseTraining(std::vector<DatasetItem>* items, double snr_lo_db,
                      double snr_hi_db, uint64_t seed) {
  CheckData(snr_lo_db <= snr_hi_db, "add_noise: invalid SNR range");
  Rng rng(seed);
  for (DatasetItem& item : *items) {
    const double snr_db =
        snr_lo_db == snr_hi_db ? snr_lo_db : rng.NextUniform(snr_lo_db, snr_hi_db);
    if (std::isinf(snr_db)) continue;  // +inf sentinel: item unchanged
    // Noise covers the sentence support only; context stays silent.
    const int64_t s0 = item.sentence_start;
    const double speech_rms = Rms(item.waveform.data() + s0, item.sentence_len);
    if (speech_rms == 0.0) continue;
    const double noise_rms = speech_rms * std::pow(10.0, -snr_db / 20.0);
    std::vector<double> noise(static_cast<size_t>(item.sentence_len));
    for (double& v : noise) v = rng.NextGaussian();
    const double scale = noise_rms / Rms(noise);
    for (int64_t i = 0; i < item.sentence_len; ++i)
      item.waveform[static_cast<size_t>(s0 + i)] += noise[static_cast<size_t>(i)] * scale;
  }
}

}  // namespace trainer
}  // namespace hacomp
