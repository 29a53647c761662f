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

#ifndef HACOMP_CORE_ADAM_H_
#define HACOMP_CORE_ADAM_H_

#include <string>
#include <vector>

#include "core/array.hpp"

namespace hacomp {

// A named trainable array, as handed to the optimizer.
struct NamedParam {
  std::string name;
  Array value;
};

// Adam with bias correction. Moment buffers are allocated to match the
// parameter list on the first step and the list must stay stable afterwards.
class AdamState {
 public:
  explicit AdamState(double lr = 1e-4, double beta1 = 0.9, double beta2 = 0.999,
                     double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // Applies one update using each parameter's accumulated gradient buffer
  // (missing buffers count as zero). Throws on non-finite gradients, naming
  // the parameter. Does not clear gradients.
  void Step(std::vector<NamedParam>* params);

  int64_t step_count() const { return step_; }
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int64_t step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace hacomp

#endif  // HACOMP_CORE_ADAM_H_
