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

#ifndef PIXREG_TAPNET_H_
#define PIXREG_TAPNET_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pixreg/autodiff.h"
#include "pixreg/tensor.h"

namespace pixreg {

enum class LayerKind : std::uint8_t { kConv = 1, kRelu = 2, kAvgPool = 3, kLinear = 4 };

struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  int out_channels = 0;  // conv
  int kernel = 3;        // conv
  int stride = 1;        // conv
  int padding = 1;       // conv
  bool skip = false;     // conv: identity add of the layer input
  int pool = 2;          // pool window
  int out_features = 0;  // linear

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Layer list plus the input geometry and the indices of the tap layers.
//
// Text form (also the config value of `arch`): comma-separated tokens
//   conv<C>[k<K>][s<S>][p<P>][+skip]   relu   pool<P>   fc<N>
// e.g. "conv16,relu,conv32,relu,pool2,conv32,relu,conv64,relu,pool2,fc10".
struct Architecture {
  int in_channels = 1;
  int in_height = 28;
  int in_width = 28;
  std::vector<LayerSpec> layers;
  std::vector<int> taps;

  int num_classes() const;
  std::string LayersToString() const;
  std::string TapsToString() const;

  // Parses the layer tokens; `taps` is a comma list of layer indices or
  // "auto" (every relu directly after a conv).
  static Architecture Parse(std::string_view layers, std::string_view taps, int in_channels,
                            int in_height, int in_width);
  // 4 conv layers (16/32/32/64, 3x3, pad 1), 2x2 pooling after the 2nd and
  // 4th, taps after every conv activation.
  static Architecture DeskDefault(int in_channels, int in_height, int in_width,
                                  int num_classes);

  // Checks layer/tap invariants and the shape flow; throws kShapeMismatch or
  // kInvalidArgument naming the offending layer.
  void Validate() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct TapOutputs {
  Var logits;
  std::vector<Var> taps;
};

struct ForwardResult {
  Tensor logits;
  std::vector<Tensor> taps;
};

// Small CNN whose forward pass exports the post-activation feature maps of
// its tap layers alongside the class logits.
class TapNet {
 public:
  // Kaiming-style fan-in uniform weights, zero biases.
  static TapNet Create(const Architecture& arch, std::uint64_t seed);
  // Zero-initialized parameters, used by deserialization and tests.
  static TapNet Zeros(const Architecture& arch);

  const Architecture& arch() const { return arch_; }
  std::vector<Parameter>& params() { return params_; }
  const std::vector<Parameter>& params() const { return params_; }
  Parameter& param(std::string_view name);
  const Parameter& param(std::string_view name) const;

  // Records the forward pass on `tape`. Parameters are bound when the tape
  // records; otherwise they enter as constants.
  TapOutputs Forward(Tape& tape, Var batch);
  // Records the forward pass with the parameters as constants, for input
  // gradients of a frozen net.
  TapOutputs ForwardFrozen(Tape& tape, Var batch) const;

  // Inference without gradients. Safe to call concurrently on a frozen net.
  ForwardResult Forward(const Tensor& batch) const;
  std::vector<int> Predict(const Tensor& batch) const;

 private:
  explicit TapNet(Architecture arch);
  template <typename ParamFn>
  TapOutputs Run(Tape& tape, Var batch, ParamFn&& param_var) const;

  Architecture arch_;
  std::vector<Parameter> params_;
  std::vector<int> weight_index_;  // per layer: index of its weight in params_, or -1
};

std::vector<int> Argmax(const Tensor& logits);

}  // namespace pixreg

#endif  // PIXREG_TAPNET_H_
