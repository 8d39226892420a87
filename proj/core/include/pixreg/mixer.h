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


#ifndef PIXREG_MIXER_H_
#define PIXREG_MIXER_H_

#include <span>
#include <vector>

#include "pixreg/autodiff.h"
#include "pixreg/tensor.h"

namespace pixreg {

// Numerically stable softmax, computed in double.
std::vector<double> Softmax(std::span<const float> logits);

// Trainable convex weights over K tap layers: gamma = softmax(logits).
class GammaMixer {
 public:
  explicit GammaMixer(std::size_t k);
  static GammaMixer FromLogits(std::span<const float> logits);

  std::size_t size() const { return logits_.value.size(); }
  Parameter& logits() { return logits_; }
  const Parameter& logits() const { return logits_; }
  std::vector<float> LogitValues() const;

  std::vector<double> Weights() const;
  // Differentiable weights. On a recording tape the logits are bound as a
  // parameter; on an inference tape they enter as a constant.
  Var Weights(Tape& tape);

 private:
  Parameter logits_;
};

// Element-wise sum_l w[l] * per_layer[l]. All inputs share one shape and
// `weights` has exactly per_layer.size() entries.
Var MixLayers(std::span<const Var> per_layer, Var weights);
Tensor MixLayers(std::span<const Tensor> per_layer, const GammaMixer& mixer);

}  // namespace pixreg

#endif  // PIXREG_MIXER_H_
