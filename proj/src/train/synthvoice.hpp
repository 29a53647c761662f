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
// Deterministic speech-like test sentences: voiced syllables (glottal pulse
// trains through formant resonators) alternating with pauses and fricative
// noise bursts. Not speech, but it carries the features the training loop
// cares about: harmonic structure with f0 modulation, energy across the
// band, and silence gaps.

#ifndef HACOMP_TRAIN_SYNTHVOICE_H_
#define HACOMP_TRAIN_SYNTHVOICE_H_

#include <cstdint>
#include <string>
#include <vector>

namespace hacomp {
namespace synthvoice {

std::vector<double> Sentence(uint64_t seed, double duration_s,
                             double sample_rate_hz);

// Writes `count` sentences as sentence_###.wav under dir (created if absent).
void WriteCorpus(const std::string& dir, int64_t count, double duration_s,
                 double sample_rate_hz, uint64_t seed, bool float32 = true);

}  // namespace synthvoice
}  // namespace hacomp

#endif  // HACOMP_TRAIN_SYNTHVOICE_H_
