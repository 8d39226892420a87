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


#include "pixreg/mixer.h"

#include <algorithm>
#include <cmath>

#include "pixreg/errors.h"

namespace pixreg {

std::vector<double> Softmax(std::span<const float> logits) {
  Require(!logits.empty(), ErrorCode::kInvalidArgument, "softmax of an empty vector");
  const double peak = *std::max_element(logits.begin(), logits.end());
  Require(std::isfinite(peak), ErrorCode::kNumeric, "softmax: non-finite logit");
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    Require(std::isfinite(logits[k]), ErrorCode::kNumeric, "softmax: non-finite logit");
    out[k] = std::exp(static_cast<double>(logits[k]) - peak);
    total += out[k];
  }
  for (double& w : out) w /= total;
  return out;
}

GammaMixer::GammaMixer(std::size_t k) : logits_{"mixer.logits", Tensor({k == 0 ? 1 : k})} {
  Require(k > 0, ErrorCode::kInvalidArgument, "mixer needs at least one layer");
}

GammaMixer GammaMixer::FromLogits(std::span<const float> logits) {
  GammaMixer m(logits.size());
  std::copy(logits.begin(), logits.end(), m.logits_.value.data().begin());
  return m;
}

std::vector<float> GammaMixer::LogitValues() const {
  auto d = logits_.value.data();
  return {d.begin(), d.end()};
}

std::vector<double> GammaMixer::Weights() const { return Softmax(logits_.value.data()); }

Var GammaMixer::Weights(Tape& tape) {
  const Var z = tape.recording() ? tape.Bind(logits_) : tape.Constant(logits_.value);
  const std::vector<double> w = Softmax(z.value().data());
  Tensor out({w.size()});
  for (std::size_t k = 0; k < w.size(); ++k) out[k] = static_cast<float>(w[k]);
  return tape.Record(std::move(out), {z}, [w](const Tensor& g, std::span<Tensor* const> in) {
    if (!in[0]) return;
    double dot = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) dot += g[k] * w[k];
    for (std::size_t k = 0; k < w.size(); ++k) {
      (*in[0])[k] += static_cast<float>(w[k] * (g[k] - dot));
    }
  });
}

Var MixLayers(std::span<const Var> per_layer, Var weights) {
  Require(!per_layer.empty(), ErrorCode::kInvalidArgument, "mix_layers: no layers");
  const std::size_t k = per_layer.size();
  Require(weights.value().size() == k, ErrorCode::kShapeMismatch,
          "mix_layers: " + std::to_string(k) + " layers but " +
              std::to_string(weights.value().size()) + " mixer weights");
  const Shape& shape = per_layer[0].shape();
  for (const Var& v : per_layer) {
    Require(v.shape() == shape, ErrorCode::kShapeMismatch,
            "mix_layers: layer shapes differ (" + ShapeToString(shape) + " vs " +
                ShapeToString(v.shape()) + ")");
  }
  const std::size_t size = ShapeVolume(shape);
  const Tensor w = weights.value();
  std::vector<double> acc(size, 0.0);
  for (std::size_t l = 0; l < k; ++l) {
    const Tensor& m = per_layer[l].value();
    for (std::size_t i = 0; i < size; ++i) acc[i] += static_cast<double>(w[l]) * m[i];
  }
  Tensor out(shape);
  for (std::size_t i = 0; i < size; ++i) out[i] = static_cast<float>(acc[i]);

  std::vector<Var> inputs(per_layer.begin(), per_layer.end());
  inputs.push_back(weights);
  std::vector<Tensor> layers;
  layers.reserve(k);
  for (const Var& v : per_layer) layers.push_back(v.value());
  Tape* tape = weights.tape();
  return tape->Record(
      std::move(out), inputs,
      [layers = std::move(layers), w](const Tensor& g, std::span<Tensor* const> in) {
        const std::size_t k = layers.size();
        for (std::size_t l = 0; l < k; ++l) {
          if (in[l]) {
            for (std::size_t i = 0; i < g.size(); ++i) (*in[l])[i] += w[l] * g[i];
          }
          if (in[k]) {
            double dot = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
              dot += static_cast<double>(g[i]) * layers[l][i];
            }
            (*in[k])[l] += static_cast<float>(dot);
          }
        }
      });
}

Tensor MixLayers(std::span<const Tensor> per_layer, const GammaMixer& mixer) {
  Require(!per_layer.empty(), ErrorCode::kInvalidArgument, "mix_layers: no layers");
  Require(per_layer.size() == mixer.size(), ErrorCode::kShapeMismatch,
          "mix_layers: " + std::to_string(per_layer.size()) + " layers but mixer has " +
              std::to_string(mixer.size()));
  const std::vector<double> w = mixer.Weights();
  const Shape& shape = per_layer[0].shape();
  std::vector<double> acc(per_layer[0].size(), 0.0);
  for (std::size_t l = 0; l < per_layer.size(); ++l) {
    Require(per_layer[l].shape() == shape, ErrorCode::kShapeMismatch,
            "mix_layers: layer shapes differ");
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w[l] * per_layer[l][i];
  }
  Tensor out(shape);
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<float>(acc[i]);
  return out;
}

}  // namespace pixreg
