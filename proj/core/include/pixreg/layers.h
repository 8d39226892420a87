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

#ifndef PIXREG_LAYERS_H_
#define PIXREG_LAYERS_H_

#include <span>

#include "pixreg/autodiff.h"

namespace pixreg::ops {

// x: (B, C, H, W), weight: (O, C, k, k), bias: (O). Zero padding.
Var Conv2d(Var x, Var weight, Var bias, int stride, int padding);

// Non-overlapping average pooling with a size x size window. Trailing rows
// and columns that do not fill a window are dropped.
Var AvgPool(Var x, int size);

// x: (B, ...) flattened to (B, F); weight: (O, F); bias: (O). Output (B, O).
Var Linear(Var x, Var weight, Var bias);

enum class Reduction { kMean, kSum };

// Softmax cross-entropy of logits (B, K) against integer labels.
Var SoftmaxCrossEntropy(Var logits, std::span<const int> labels,
                        Reduction reduction = Reduction::kMean);

}  // namespace pixreg::ops

#endif  // PIXREG_LAYERS_H_
