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
// Reverse-mode automatic differentiation over 1-D/2-D double arrays. An Array
// is a shared handle to a value buffer plus an optional gradient buffer; a
// Tape records operations in execution order and replays them backwards.
//
// Conventions, fixed and test-visible:
//   * 64-bit floats throughout.
//   * Gradients accumulate; call ZeroGrad between optimizer steps.
//   * One tape is single-threaded; independent tapes may run concurrently.

#ifndef HACOMP_CORE_ARRAY_H_
#define HACOMP_CORE_ARRAY_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace hacomp {

class Tape;

struct ArrayData {
  std::vector<int64_t> shape;
  std::vector<double> v;
  std::vector<double> grad;  // empty until touched by a backward pass
  bool requires_grad = false;
  const Tape* tape = nullptr;  // producer tape for intermediates
};

class Array {
 public:
  Array() = default;

  static Array Zeros(std::vector<int64_t> shape, bool requires_grad = false);
  static Array Full(std::vector<int64_t> shape, double value,
                    bool requires_grad = false);
  static Array FromVector(std::vector<int64_t> shape, std::vector<double> v,
                          bool requires_grad = false);
  static Array Scalar(double value, bool requires_grad = false);

  bool defined() const { return d_ != nullptr; }
  const std::vector<int64_t>& shape() const { return d_->shape; }
  int64_t rank() const { return static_cast<int64_t>(d_->shape.size()); }
  int64_t size() const { return static_cast<int64_t>(d_->v.size()); }
  int64_t dim(int64_t i) const { return d_->shape[static_cast<size_t>(i)]; }

  double* data() { return d_->v.data(); }
  const double* data() const { return d_->v.data(); }
  std::vector<double>& values() { return d_->v; }
  const std::vector<double>& values() const { return d_->v; }

  double item() const {
    Check(size() == 1, "Array::item: array is not scalar");
    return d_->v[0];
  }

  bool requires_grad() const { return d_->requires_grad; }
  void set_requires_grad(bool r) { d_->requires_grad = r; }

  // Gradient buffer; allocated (zero-filled) on first access.
  std::vector<double>& grad();
  bool has_grad() const { return !d_->grad.empty(); }
  void ZeroGrad() { d_->grad.assign(d_->v.size(), 0.0); }

  std::shared_ptr<ArrayData> ptr() const { return d_; }

  // True when an op consuming this array must be recorded on `tape`.
  bool TracksGradOn(const Tape* tape) const {
    return d_ && (d_->requires_grad || (d_->tape != nullptr && d_->tape == tape));
  }

 private:
  explicit Array(std::shared_ptr<ArrayData> d) : d_(std::move(d)) {}
  std::shared_ptr<ArrayData> d_;
  friend class Tape;
};

// Records one closure per op. Each closure reads the output gradient and
// accumulates into the input gradients.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void Record(std::shared_ptr<ArrayData> output,
              std::function<void()> backward) {
    output->tape = this;
    nodes_.push_back({std::move(output), std::move(backward)});
  }

  // Seeds d(output)/d(output) = 1 and replays all recorded ops in reverse.
  // The output must be scalar. Repeated calls accumulate into existing
  // gradient buffers.
  void Backward(const Array& output);

  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    std::shared_ptr<ArrayData> output;
    std::function<void()> backward;
  };
  std::vector<Node> nodes_;
};

inline int64_t NumElements(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string ShapeToString(const std::vector<int64_t>& shape);

}  // namespace hacomp

#endif  // HACOMP_CORE_ARRAY_H_
