// Copyright 2026 The pixreg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pixreg/optim.h"

#include <cmath>

#include "pixreg/errors.h"

namespace pixreg {

SgdMomentum::SgdMomentum(float momentum) : momentum_(momentum) {
  Require(momentum >= 0.0f && momentum < 1.0f, ErrorCode::kInvalidArgument,
          "momentum must lie in [0, 1)");
}

void SgdMomentum::Step(std::span<Parameter* const> params, const GradientMap& grads, float lr) {
  Require(lr >= 0.0f && std::isfinite(lr), ErrorCode::kInvalidArgument,
          "learning rate must be finite and non-negative");
  for (Parameter* p : params) {
    const Tensor* g = grads.Find(*p);
    if (g == nullptr) continue;
    Require(g->shape() == p->value.shape(), ErrorCode::kShapeMismatch,
            "gradient shape mismatch for '" + p->name + "'");
    Require(g->AllFinite(), ErrorCode::kNumeric, "non-finite gradient for '" + p->name + "'");
  }
  for (Parameter* p : params) {
    const Tensor* g = grads.Find(*p);
    if (g == nullptr) continue;
    auto [it, inserted] = velocity_.try_emplace(p, p->value.shape(), 0.0f);
    auto v = it->second.data();
    auto gd = g->data();
    auto pd = p->value.data();
    for (std::size_t i = 0; i < pd.size(); ++i) {
      v[i] = momentum_ * v[i] + gd[i];
      pd[i] -= lr * v[i];
    }
  }
}

const Tensor* SgdMomentum::Velocity(const Parameter& p) const {
  auto it = velocity_.find(&p);
  return it == velocity_.end() ? nullptr : &it->second;
}

}  // namespace pixreg
