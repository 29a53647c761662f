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
// The trainable compensation model: a strided 1-D convolutional
// encoder-decoder processing fixed windows end to end (waveform in,
// waveform out).
//
// Wiring, fixed by convention (and reconciled against the reported parameter
// count in the tests):
//   * Encoder layer i: conv (kernel 32, stride 2), PReLU (one alpha per
//     channel). Time halves per layer.
//   * Decoder layer j: transposed conv (stride 2, exact adjoint padding),
//     PReLU on all but the last layer; the last layer is linear with one
//     output channel.
//   * Skip connections concatenate the mirrored encoder output onto the
//     previous decoder output along the channel axis; the first decoder layer
//     consumes the bottleneck alone.

#ifndef HACOMP_DNN_MODEL_H_
#define HACOMP_DNN_MODEL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "core/adam.hpp"
#include "core/array.hpp"

namespace hacomp {
namespace dnn {

struct ArchSpec {
  std::vector<int64_t> encoder_filters = {16, 32, 32, 64, 64, 128, 128, 256};
  int64_t kernel_len = 32;
  int64_t stride = 2;

  int64_t depth() const { return static_cast<int64_t>(encoder_filters.size()); }
  // Inputs must be multiples of stride^depth.
  int64_t granularity() const;
  void Validate() const;

  static ArchSpec Default() { return ArchSpec{}; }
  // Small architecture for desk-scale experiments (granularity 8).
  static ArchSpec Desk() { return ArchSpec{{16, 32, 64}, 32, 2}; }
  // "16,32,64" -> encoder filters; "desk"/"paper" name the two above.
  static ArchSpec Parse(const std::string& text);
};

struct ModelParams {
  ArchSpec arch;
  // enc<i>.kernels / .bias / .alpha, then dec<j>.kernels / .bias / .alpha
  // (no alpha on the final decoder layer), in layer order.
  std::vector<NamedParam> params;

  Array* Find(const std::string& name);
  void ZeroGrads();
  void SetRequiresGrad(bool rg);
  // FNV-1a over the raw parameter bytes, for frozen-parameter checks.
  uint64_t ContentHash() const;
};

// Deterministic fan-in-scaled uniform init; biases 0, PReLU alphas 0.25.
ModelParams Build(const ArchSpec& spec, uint64_t seed);

// Analytic parameter count for the wiring above.
int64_t ParamCount(const ArchSpec& spec);

// End-to-end forward: x is 1-D with length a positive multiple of
// granularity(); output has the same length.
Array Forward(Tape* t, ModelParams& model, const Array& x);

// Splits x into non-overlapping windows, applies Forward to each and
// concatenates; bit-identical to per-window processing by construction.
Array ForwardWindowed(Tape* t, ModelParams& model, const Array& x,
                      int64_t window);

// Checkpoint: magic "DNNHA1", version byte 0x01, little-endian u32 JSON
// manifest length, manifest, then raw little-endian float64 blobs in manifest
// order. The manifest echoes the architecture plus caller metadata.
void SaveCheckpoint(const std::string& path, const ModelParams& model,
                    const std::string& metadata_json);
ModelParams LoadCheckpoint(const std::string& path, std::string* metadata_json);

}  // namespace dnn
}  // namespace hacomp

#endif  // HACOMP_DNN_MODEL_H_
