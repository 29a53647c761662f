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

#include "dnn/model.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/ops.hpp"
#include "core/rng.hpp"

namespace hacomp {
namespace dnn {

namespace {

// Output channel counts of the decoder layers: the encoder filters mirrored
// one step (bottleneck dropped), then a single-channel output layer.
std::vector<int64_t> DecoderFilters(const ArchSpec& spec) {
  std::vector<int64_t> dec;
  for (int64_t i = spec.depth() - 2; i >= 0; --i)
    dec.push_back(spec.encoder_filters[static_cast<size_t>(i)]);
  dec.push_back(1);
  return dec;
}

// Input channels of decoder layer j: previous decoder output concatenated
// with the mirrored encoder output (the first layer sees the bottleneck).
std::vector<int64_t> DecoderInputs(const ArchSpec& spec) {
  const std::vector<int64_t>& enc = spec.encoder_filters;
  std::vector<int64_t> dec_out = DecoderFilters(spec);
  std::vector<int64_t> in;
  in.push_back(enc.back());
  for (size_t j = 1; j < dec_out.size(); ++j) {
    const int64_t skip = enc[enc.size() - 1 - j];
    in.push_back(dec_out[j - 1] + skip);
  }
  return in;
}

}  // namespace

int64_t ArchSpec::granularity() const {
  int64_t g = 1;
  for (int64_t i = 0; i < depth(); ++i) g *= stride;
  return g;
}

void ArchSpec::Validate() const {
  Check(depth() >= 2, "arch: need at least 2 encoder layers");
  Check(stride >= 2, "arch: stride must be >= 2");
  Check(kernel_len >= stride, "arch: kernel length must be >= stride");
  for (int64_t f : encoder_filters) Check(f >= 1, "arch: bad filter count");
}

ArchSpec ArchSpec::Parse(const std::string& text) {
  if (text == "paper" || text.empty()) return Default();
  if (text == "desk") return Desk();
  ArchSpec spec;
  spec.encoder_filters.clear();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    spec.encoder_filters.push_back(std::stoll(item));
  spec.Validate();
  return spec;
}

Array* ModelParams::Find(const std::string& name) {
  for (NamedParam& p : params)
    if (p.name == name) return &p.value;
  return nullptr;
}

void ModelParams::ZeroGrads() {
  for (NamedParam& p : params) p.value.ZeroGrad();
}

void ModelParams::SetRequiresGrad(bool rg) {
  for (NamedParam& p : params) p.value.set_requires_grad(rg);
}

uint64_t ModelParams::ContentHash() const {
  uint64_t h = 1469598103934665603ULL;
  for (const NamedParam& p : params) {
    for (double v : p.value.values()) {
      uint64_t bits;
      std::memcpy(&bits, &v, sizeof(bits));
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xffULL;
        h *= 1099511628211ULL;
      }
    }
  }
  return h;
}

ModelParams Build(const ArchSpec& spec, uint64_t seed) {
  spec.Validate();
  ModelParams model;
  model.arch = spec;
  Rng rng(seed);

  auto uniform_fill = [&](Array* a, double bound) {
    for (double& v : a->values()) v = rng.NextUniform(-bound, bound);
  };
  auto add_layer = [&](const std::string& name, int64_t ci, int64_t co,
                       bool transposed, bool with_alpha) {
    const std::vector<int64_t> kshape =
        transposed ? std::vector<int64_t>{ci, co, spec.kernel_len}
                   : std::vector<int64_t>{co, ci, spec.kernel_len};
    Array k = Array::Zeros(kshape, true);
    uniform_fill(&k, std::sqrt(1.0 / static_cast<double>(ci * spec.kernel_len)));
    model.params.push_back({name + ".kernels", k});
    model.params.push_back({name + ".bias", Array::Zeros({co}, true)});
    if (with_alpha)
      model.params.push_back({name + ".alpha", Array::Full({co}, 0.25, true)});
  };

  int64_t ci = 1;
  for (int64_t i = 0; i < spec.depth(); ++i) {
    const int64_t co = spec.encoder_filters[static_cast<size_t>(i)];
    add_layer("enc" + std::to_string(i), ci, co, false, true);
    ci = co;
  }
  const std::vector<int64_t> dec_in = DecoderInputs(spec);
  const std::vector<int64_t> dec_out = DecoderFilters(spec);
  for (size_t j = 0; j < dec_out.size(); ++j) {
    const bool last = j + 1 == dec_out.size();
    add_layer("dec" + std::to_string(j), dec_in[j], dec_out[j], true, !last);
  }
  return model;
}

int64_t ParamCount(const ArchSpec& spec) {
  spec.Validate();
  int64_t count = 0;
  int64_t ci = 1;
  for (int64_t i = 0; i < spec.depth(); ++i) {
    const int64_t co = spec.encoder_filters[static_cast<size_t>(i)];
    count += spec.kernel_len * ci * co + co /*bias*/ + co /*alpha*/;
    ci = co;
  }
  const std::vector<int64_t> dec_in = DecoderInputs(spec);
  const std::vector<int64_t> dec_out = DecoderFilters(spec);
  for (size_t j = 0; j < dec_out.size(); ++j) {
    const bool last = j + 1 == dec_out.size();
    count += spec.kernel_len * dec_in[j] * dec_out[j] + dec_out[j];
    if (!last) count += dec_out[j];  // alpha
  }
  return count;
}

Array Forward(Tape* t, ModelParams& model, const Array& x) {
  Check(x.rank() == 1, "forward: expects a 1-D signal");
  const ArchSpec& spec = model.arch;
  const int64_t g = spec.granularity();
  Check(x.size() > 0 && x.size() % g == 0,
        "forward: input length " + std::to_string(x.size()) +
            " is not a multiple of the required granularity " + std::to_string(g));

  auto p = [&](const std::string& name) -> Array& {
    Array* a = model.Find(name);
    Check(a != nullptr, "forward: missing parameter " + name);
    return *a;
  };

  Array h = ops::Reshape(t, x, {1, x.size()});
  std::vector<Array> enc_outs;
  for (int64_t i = 0; i < spec.depth(); ++i) {
    const std::string n = "enc" + std::to_string(i);
    h = ops::Conv1d(t, h, p(n + ".kernels"), p(n + ".bias"), spec.stride);
    h = ops::Prelu(t, h, p(n + ".alpha"));
    enc_outs.push_back(h);
  }
  const int64_t dec_layers = spec.depth();
  for (int64_t j = 0; j < dec_layers; ++j) {
    const std::string n = "dec" + std::to_string(j);
    if (j > 0) {
      const Array& skip = enc_outs[static_cast<size_t>(spec.depth() - 1 - j)];
      h = ops::ConcatRows(t, h, skip);
    }
    h = ops::Conv1dTransposed(t, h, p(n + ".kernels"), p(n + ".bias"), spec.stride);
    if (j + 1 < dec_layers) h = ops::Prelu(t, h, p(n + ".alpha"));
  }
  return ops::Reshape(t, h, {x.size()});
}

Array ForwardWindowed(Tape* t, ModelParams& model, const Array& x,
                      int64_t window) {
  Check(x.rank() == 1, "forward_windowed: expects a 1-D signal");
  Check(window > 0 && window % model.arch.granularity() == 0,
        "forward_windowed: window must be a positive multiple of " +
            std::to_string(model.arch.granularity()));
  Check(x.size() % window == 0,
        "forward_windowed: input length " + std::to_string(x.size()) +
            " is not a multiple of the window " + std::to_string(window));
  const int64_t n_windows = x.size() / window;
  if (n_windows == 1) return Forward(t, model, x);
  std::vector<Array> outs;
  outs.reserve(static_cast<size_t>(n_windows));
  for (int64_t w = 0; w < n_windows; ++w)
    outs.push_back(Forward(t, model, ops::SliceCols(t, x, w * window, window)));
  return ops::ConcatCols(t, outs);
}

// ---------------------------------------------------------------------------
// checkpoint io

namespace {
constexpr char kMagic[6] = {'D', 'N', 'N', 'H', 'A', '1'};
constexpr uint8_t kVersion = 1;

void PutU32(std::ostream& os, uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

uint32_t GetU32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

void SaveCheckpoint(const std::string& path, const ModelParams& model,
                    const std::string& metadata_json) {
  nlohmann::json manifest;
  manifest["arch"] = {{"encoder_filters", model.arch.encoder_filters},
                      {"kernel_len", model.arch.kernel_len},
                      {"stride", model.arch.stride}};
  manifest["params"] = nlohmann::json::array();
  for (const NamedParam& p : model.params)
    manifest["params"].push_back({{"name", p.name}, {"shape", p.value.shape()}});
  manifest["metadata"] =
      metadata_json.empty() ? nlohmann::json::object()
                            : nlohmann::json::parse(metadata_json);
  const std::string mstr = manifest.dump();

  std::ofstream os(path, std::ios::binary);
  Check(os.good(), "checkpoint: cannot write " + path);
  os.write(kMagic, sizeof(kMagic));
  os.put(static_cast<char>(kVersion));
  PutU32(os, static_cast<uint32_t>(mstr.size()));
  os.write(mstr.data(), static_cast<std::streamsize>(mstr.size()));
  // Raw little-endian float64 blobs in manifest order. The build targets
  // little-endian hosts; byte order is part of the format.
  for (const NamedParam& p : model.params)
    os.write(reinterpret_cast<const char*>(p.value.data()),
             static_cast<std::streamsize>(p.value.size() * sizeof(double)));
  Check(os.good(), "checkpoint: write failed for " + path);
}

ModelParams LoadCheckpoint(const std::string& path, std::string* metadata_json) {
  std::ifstream is(path, std::ios::binary);
  CheckData(is.good(), "checkpoint: cannot read " + path);
  char magic[6];
  is.read(magic, sizeof(magic));
  CheckConfig(is.good() && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0,
              "checkpoint: bad magic in " + path);
  const int version = is.get();
  CheckConfig(version == kVersion, "checkpoint: unsupported version " +
                                 std::to_string(version) + " in " + path);
  const uint32_t mlen = GetU32(is);
  std::string mstr(mlen, '\0');
  is.read(mstr.data(), mlen);
  Check(is.good(), "checkpoint: truncated manifest in " + path);
  nlohmann::json manifest = nlohmann::json::parse(mstr);

  ModelParams model;
  model.arch.encoder_filters =
      manifest["arch"]["encoder_filters"].get<std::vector<int64_t>>();
  model.arch.kernel_len = manifest["arch"]["kernel_len"].get<int64_t>();
  model.arch.stride = manifest["arch"]["stride"].get<int64_t>();
  model.arch.Validate();
  for (const auto& pj : manifest["params"]) {
    const std::string name = pj["name"].get<std::string>();
    const std::vector<int64_t> shape = pj["shape"].get<std::vector<int64_t>>();
    Array a = Array::Zeros(shape, true);
    is.read(reinterpret_cast<char*>(a.data()),
            static_cast<std::streamsize>(a.size() * sizeof(double)));
    Check(is.good(), "checkpoint: truncated blob for " + name + " in " + path);
    model.params.push_back({name, a});
  }
  if (metadata_json) *metadata_json = manifest["metadata"].dump();
  return model;
}

}  // namespace dnn
}  // namespace hacomp
