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

#ifndef PIXREG_OPTIM_H_
#define PIXREG_OPTIM_H_

#include <span>
#include <unordered_map>

#include "pixreg/autodiff.h"

namespace pixreg {

// Heavy-ball SGD: v <- momentum * v + g; p <- p - lr * v.
class SgdMomentum {
 public:
  explicit SgdMomentum(float momentum);

  float momentum() const { return momentum_; }

  // Updates every parameter that has an entry in `grads`. If any gradient is
  // non-finite nothing is modified and kNumeric is thrown.
  void Step(std::span<Parameter* const> params, const GradientMap& grads, float lr);

  const Tensor* Velocity(const Parameter& p) const;

 private:
  float momentum_;
  std::unordered_map<const Parameter*, Tensor> velocity_;
};

}  // namespace pixreg

#endif  // PIXREG_OPTIM_H_
