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

#include "train/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "core/common.hpp"

namespace hacomp {
namespace wav {

namespace {

uint32_t ReadU32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}
uint16_t ReadU16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}
void PutU32(std::string* s, uint32_t v) {
  s->push_back(static_cast<char>(v & 0xff));
  s->push_back(static_cast<char>((v >> 8) & 0xff));
  s->push_back(static_cast<char>((v >> 16) & 0xff));
  s->push_back(static_cast<char>((v >> 24) & 0xff));
}
void PutU16(std::string* s, uint16_t v) {
  s->push_back(static_cast<char>(v & 0xff));
  s->push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

WavData Read(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  CheckData(is.good(), "wav: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  CheckData(bytes.size() >= 44, "wav: file too short: " + path);
  CheckData(std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
            std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
        "wav: not a RIFF/WAVE file: " + path);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  size_t data_off = 0, data_len = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint32_t chunk_len = ReadU32(bytes.data() + pos + 4);
    const unsigned char* body = bytes.data() + pos + 8;
    if (std::memcmp(bytes.data() + pos, "fmt ", 4) == 0) {
      CheckData(chunk_len >= 16, "wav: malformed fmt chunk: " + path);
      format = ReadU16(body);
      channels = ReadU16(body + 2);
      rate = ReadU32(body + 4);
      bits = ReadU16(body + 14);
    } else if (std::memcmp(bytes.data() + pos, "data", 4) == 0) {
      data_off = pos + 8;
      data_len = std::min<size_t>(chunk_len, bytes.size() - data_off);
    }
    pos += 8 + chunk_len + (chunk_len & 1);
  }
  CheckData(rate > 0, "wav: missing fmt chunk: " + path);
  CheckData(channels == 1, "wav: expected mono, got " + std::to_string(channels) +
                           " channels: " + path);
  CheckData(data_off != 0 && data_len > 0, "wav: empty data chunk: " + path);

  WavData out;
  out.sample_rate_hz = rate;
  if (format == 1 && bits == 16) {
    const size_t n = data_len / 2;
    out.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      int16_t v;
      std::memcpy(&v, bytes.data() + data_off + 2 * i, 2);
      out.samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else if (format == 3 && bits == 32) {
    const size_t n = data_len / 4;
    out.samples.resize(n);
    out.was_float = true;
    for (size_t i = 0; i < n; ++i) {
      float v;
      std::memcpy(&v, bytes.data() + data_off + 4 * i, 4);
      out.samples[i] = static_cast<double>(v);
    }
  } else {
    FailData("wav: unsupported encoding (format " + std::to_string(format) + ", " +
         std::to_string(bits) + " bits) in " + path +
         "; expected 16-bit PCM or 32-bit float");
  }
  CheckData(!out.samples.empty(), "wav: no samples in " + path);
  return out;
}

void Write(const std::string& path, const std::vector<double>& samples,
           double sample_rate_hz, bool float32) {
  const uint32_t rate = static_cast<uint32_t>(std::lround(sample_rate_hz));
  const uint16_t bytes_per = float32 ? 4 : 2;
  const uint32_t data_len = static_cast<uint32_t>(samples.size() * bytes_per);

  std::string out;
  out.reserve(60 + data_len);
  out += "RIFF";
  PutU32(&out, 4 + (8 + 16) + (float32 ? 8 + 4 : 0) + 8 + data_len);
  out += "WAVE";
  out += "fmt ";
  PutU32(&out, 16);
  PutU16(&out, float32 ? 3 : 1);
  PutU16(&out, 1);
  PutU32(&out, rate);
  PutU32(&out, rate * bytes_per);
  PutU16(&out, bytes_per);
  PutU16(&out, static_cast<uint16_t>(8 * bytes_per));
  if (float32) {
    out += "fact";
    PutU32(&out, 4);
    PutU32(&out, static_cast<uint32_t>(samples.size()));
  }
  out += "data";
  PutU32(&out, data_len);
  for (double v : samples) {
    if (float32) {
      const float f = static_cast<float>(v);
      char b[4];
      std::memcpy(b, &f, 4);
      out.append(b, 4);
    } else {
      const double clipped = std::clamp(v, -1.0, 1.0);
      const int16_t q = static_cast<int16_t>(
          std::lround(clipped * 32767.0));
      PutU16(&out, static_cast<uint16_t>(q));
    }
  }
  std::ofstream os(path, std::ios::binary);
  CheckData(os.good(), "wav: cannot write " + path);
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  CheckData(os.good(), "wav: write failed for " + path);
}

std::vector<double> Resample(const std::vector<double>& in, double rate_in,
                             double rate_out) {
  CheckData(rate_in > 0 && rate_out > 0, "resample: bad rates");
  if (rate_in == rate_out) return in;
  const int64_t n_in = static_cast<int64_t>(in.size());
  const int64_t n_out =
      static_cast<int64_t>(std::llround(static_cast<double>(n_in) * rate_out / rate_in));
  const double cutoff = 0.95 * std::min(1.0, rate_out / rate_in);  // of in-Nyquist
  const int64_t lobes = 32;
  const double half_width = static_cast<double>(lobes) / cutoff;

  std::vector<double> out(static_cast<size_t>(n_out), 0.0);
  for (int64_t m = 0; m < n_out; ++m) {
    const double t = static_cast<double>(m) * rate_in / rate_out;
    const int64_t k0 = static_cast<int64_t>(std::ceil(t - half_width));
    const int64_t k1 = static_cast<int64_t>(std::floor(t + half_width));
    double acc = 0.0;
    for (int64_t k = std::max<int64_t>(0, k0); k <= std::min(n_in - 1, k1); ++k) {
      const double tau = (t - static_cast<double>(k)) * cutoff;
      const double sinc = tau == 0.0 ? 1.0 : std::sin(M_PI * tau) / (M_PI * tau);
      const double wpos = (t - static_cast<double>(k)) / half_width;  // [-1, 1]
      const double window = 0.5 + 0.5 * std::cos(M_PI * wpos);
      acc += in[static_cast<size_t>(k)] * sinc * window * cutoff;
    }
    out[static_cast<size_t>(m)] = acc;
  }
  return out;
}

}  // namespace wav
}  // namespace hacomp
