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

#include "core/array.hpp"

#include <sstream>

namespace hacomp {

Array Array::Zeros(std::vector<int64_t> shape, bool requires_grad) {
  auto d = std::make_shared<ArrayData>();
  d->v.assign(static_cast<size_t>(NumElements(shape)), 0.0);
  d->shape = std::move(shape);
  d->requires_grad = requires_grad;
  return Array(std::move(d));
}

Array Array::Full(std::vector<int64_t> shape, double value, bool requires_grad) {
  Array a = Zeros(std::move(shape), requires_grad);
  for (double& x : a.values()) x = value;
  return a;
}

Array Array::FromVector(std::vector<int64_t> shape, std::vector<double> v,
                        bool requires_grad) {
  Check(NumElements(shape) == static_cast<int64_t>(v.size()),
        "Array::FromVector: value count does not match shape " +
            ShapeToString(shape));
  auto d = std::make_shared<ArrayData>();
  d->shape = std::move(shape);
  d->v = std::move(v);
  d->requires_grad = requires_grad;
  return Array(std::move(d));
}

Array Array::Scalar(double value, bool requires_grad) {
  return FromVector({1}, {value}, requires_grad);
}

std::vector<double>& Array::grad() {
  if (d_->grad.empty()) d_->grad.assign(d_->v.size(), 0.0);
  return d_->grad;
}

void Tape::Backward(const Array& output) {
  Check(output.size() == 1, "backward: output is not scalar");
  Check(output.ptr()->tape == this || nodes_.empty(),
        "backward: output was not produced on this tape");
  // Intermediates start every pass clean; only leaf gradients accumulate
  // across calls.
  for (Node& n : nodes_) n.output->grad.clear();
  Array out = output;
  out.grad()[0] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    // Nodes never reached from the output keep an empty grad buffer and are
    // skipped; their inputs correctly end up with zero gradient.
    if (it->output->grad.empty()) continue;
    it->backward();
  }
}

std::string ShapeToString(const std::vector<int64_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << " x ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

}  // namespace hacomp
