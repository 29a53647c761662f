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

#include "core/adam.hpp"

#include <cmath>

namespace hacomp {

void AdamState::Step(std::vector<NamedParam>* params) {
  if (m_.empty()) {
    m_.resize(params->size());
    v_.resize(params->size());
    for (size_t p = 0; p < params->size(); ++p) {
      m_[p].assign(static_cast<size_t>((*params)[p].value.size()), 0.0);
      v_[p].assign(static_cast<size_t>((*params)[p].value.size()), 0.0);
    }
  }
  Check(m_.size() == params->size(), "adam: parameter list changed size");
  ++step_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (size_t p = 0; p < params->size(); ++p) {
    NamedParam& np = (*params)[p];
    Check(m_[p].size() == np.value.values().size(),
          "adam: shape of parameter '" + np.name + "' changed");
    const bool has_grad = np.value.has_grad();
    std::vector<double>& val = np.value.values();
    for (size_t i = 0; i < val.size(); ++i) {
      const double g = has_grad ? np.value.grad()[i] : 0.0;
      if (!std::isfinite(g))
        FailNumeric("adam: non-finite gradient in parameter '" + np.name + "'");
      m_[p][i] = beta1_ * m_[p][i] + (1.0 - beta1_) * g;
      v_[p][i] = beta2_ * v_[p][i] + (1.0 - beta2_) * g * g;
      const double mhat = m_[p][i] / bc1;
      const double vhat = v_[p][i] / bc2;
      val[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}  // namespace hacomp
