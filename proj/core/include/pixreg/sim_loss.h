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


// Arctanh similarity loss between CNN similarities and a target:
//   L = sum over ordered pairs i != j with mask(i, j) of
//       (atanh(clamp(S_cnn(i, j))) - atanh(target(i, j)))^2
// Each unordered pair therefore counts twice. S_cnn is clamped into
// [-1 + eps, 1 - eps] before atanh; clamped entries pass no gradient.
// Target values are copied when the graph is built and never receive a gradient.

#ifndef PIXREG_SIM_LOSS_H_
#define PIXREG_SIM_LOSS_H_

#include <span>

#include "pixreg/autodiff.h"
#include "pixreg/target.h"
#include "pixreg/tensor.h"

namespace pixreg {

// Per-element loss for a list of unordered pairs. `s_cnn` has one entry per
// pair; `targets` holds the matching stored target values. Every entry
// contributes `pair_weight` (2 for the symmetric double sum) times its squared
// residual. A NaN in s_cnn raises kNumeric.
Var SimLossPairs(Var s_cnn, std::span<const float> targets, double eps_clamp,
                 double pair_weight = 2.0);
double SimLossPairsValue(std::span<const float> s_cnn, std::span<const float> targets,
                         double eps_clamp, double pair_weight = 2.0);

// Full-matrix form: s_cnn is (N, N) and the target covers the same N images.
// Entries (i, j) and (j, i) each contribute, so an asymmetric s_cnn is
// handled entry by entry.
Var SimLossMatrix(Var s_cnn, const SimilarityTarget& target);
double SimLossMatrixValue(const Tensor& s_cnn, const SimilarityTarget& target);

}  // namespace pixreg

#endif  // PIXREG_SIM_LOSS_H_
