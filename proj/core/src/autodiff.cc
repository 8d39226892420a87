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

#include "pixreg/autodiff.h"

#include <algorithm>

#include "pixreg/errors.h"

namespace pixreg {

const Tensor& Var::value() const {
  Require(tape_ != nullptr, ErrorCode::kNotOnTape, "value of an unbound Var");
  return tape_->ValueOf(*this);
}

const Tensor* GradientMap::Find(const Parameter& p) const {
  for (const auto& [param, grad] : entries_) {
    if (param == &p) return &grad;
  }
  return nullptr;
}

const Tensor& GradientMap::at(const Parameter& p) const {
  const Tensor* g = Find(p);
  if (g == nullptr) Fail(ErrorCode::kNotOnTape, "parameter '" + p.name + "' was not on the tape");
  return *g;
}

void Tape::CheckOwned(const Var& v) const {
  Require(v.tape_ == this && v.id_ < nodes_.size(), ErrorCode::kNotOnTape,
          "Var does not belong to this tape");
}

const Tensor& Tape::ValueOf(const Var& v) const {
  CheckOwned(v);
  return nodes_[v.id_].value;
}

Var Tape::Constant(Tensor value) {
  Node& node = nodes_.emplace_back();
  node.value = std::move(value);
  return Var(this, nodes_.size() - 1);
}

Var Tape::Input(Tensor value) {
  Node& node = nodes_.emplace_back();
  node.value = std::move(value);
  node.requires_grad = recording();
  node.is_input = true;
  return Var(this, nodes_.size() - 1);
}

Var Tape::Bind(Parameter& parameter) {
  for (const auto& [p, id] : bound_) {
    if (p == &parameter) return Var(this, id);
  }
  // Parameters are copied into the tape so later mutation of the model cannot
  // change the recorded forward values.
  Node& node = nodes_.emplace_back();
  node.value = parameter.value;
  node.requires_grad = recording();
  node.parameter = &parameter;
  bound_.emplace_back(&parameter, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::Record(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  if (recording()) {
    for (const Var& in : inputs) {
      CheckOwned(in);
      node.inputs.push_back(in.id_);
      node.requires_grad = node.requires_grad || nodes_[in.id_].requires_grad;
    }
    if (node.requires_grad) node.backward = std::move(backward);
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

bool Tape::RequiresGrad(Var v) const {
  CheckOwned(v);
  return nodes_[v.id_].requires_grad;
}

GradientMap Tape::Backward(Var loss) {
  CheckOwned(loss);
  Require(recording(), ErrorCode::kNotOnTape, "Backward() on an inference-mode tape");
  Require(!consumed_, ErrorCode::kNotOnTape, "Backward() already ran on this tape");
  Require(nodes_[loss.id_].value.size() == 1, ErrorCode::kShapeMismatch,
          "Backward() needs a scalar loss, got shape " +
              ShapeToString(nodes_[loss.id_].value.shape()));
  consumed_ = true;

  Node& root = nodes_[loss.id_];
  root.grad = Tensor(root.value.shape(), 1.0f);
  root.has_grad = true;

  std::vector<Tensor*> slots;
  for (std::size_t id = loss.id_ + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.has_grad || !node.backward) continue;
    slots.clear();
    for (std::size_t in : node.inputs) {
      Node& src = nodes_[in];
      if (!src.requires_grad) {
        slots.push_back(nullptr);
        continue;
      }
      if (!src.has_grad) {
        src.grad = Tensor(src.value.shape(), 0.0f);
        src.has_grad = true;
      }
      slots.push_back(&src.grad);
    }
    node.backward(node.grad, slots);
    // Interior gradients are no longer needed once propagated.
    if (node.parameter == nullptr && !node.is_input) node.grad = Tensor();
  }

  GradientMap out;
  for (const auto& [param, id] : bound_) {
    Node& node = nodes_[id];
    out.Add(param, node.has_grad ? node.grad : Tensor(node.value.shape(), 0.0f));
  }
  return out;
}

const Tensor& Tape::Grad(Var v) const {
  CheckOwned(v);
  const Node& node = nodes_[v.id_];
  Require(consumed_, ErrorCode::kNotOnTape, "Grad() before Backward()");
  Require(node.is_input || node.parameter != nullptr, ErrorCode::kNotOnTape,
          "gradient requested for a Var that is not a differentiable leaf");
  Require(node.has_grad, ErrorCode::kNotOnTape, "leaf did not contribute to the loss");
  return node.grad;
}

namespace ops {

Var Add(Var a, Var b) {
  Require(a.shape() == b.shape(), ErrorCode::kShapeMismatch,
          "Add: " + ShapeToString(a.shape()) + " vs " + ShapeToString(b.shape()));
  Tensor out = a.value();
  out.AddInPlace(b.value());
  Tape* tape = a.tape();
  return tape->Record(std::move(out), {a, b},
                      [](const Tensor& g, std::span<Tensor* const> in) {
                        if (in[0]) in[0]->AddInPlace(g);
                        if (in[1]) in[1]->AddInPlace(g);
                      });
}

Var Scale(Var a, float factor) {
  Tensor out = a.value();
  for (float& v : out.data()) v *= factor;
  Tape* tape = a.tape();
  return tape->Record(std::move(out), {a},
                      [factor](const Tensor& g, std::span<Tensor* const> in) {
                        if (!in[0]) return;
                        auto dst = in[0]->data();
                        auto src = g.data();
                        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += factor * src[i];
                      });
}

Var Sum(Var a) {
  double total = 0.0;
  for (float v : a.value().data()) total += v;
  Tape* tape = a.tape();
  return tape->Record(Tensor::Scalar(static_cast<float>(total)), {a},
                      [](const Tensor& g, std::span<Tensor* const> in) {
                        if (!in[0]) return;
                        for (float& v : in[0]->data()) v += g[0];
                      });
}

Var Mean(Var a) { return Scale(Sum(a), 1.0f / static_cast<float>(a.value().size())); }

Var Relu(Var a) {
  Tensor out = a.value();
  for (float& v : out.data()) v = v > 0.0f ? v : 0.0f;
  Tape* tape = a.tape();
  const Tensor* x = &a.value();
  return tape->Record(std::move(out), {a},
                      [x](const Tensor& g, std::span<Tensor* const> in) {
                        if (!in[0]) return;
                        auto dst = in[0]->data();
                        auto src = g.data();
                        auto xv = x->data();
                        for (std::size_t i = 0; i < dst.size(); ++i) {
                          if (xv[i] > 0.0f) dst[i] += src[i];
                        }
                      });
}

Var Reshape(Var a, Shape shape) {
  Tensor out = a.value().Reshaped(shape);
  Tape* tape = a.tape();
  return tape->Record(std::move(out), {a},
                      [](const Tensor& g, std::span<Tensor* const> in) {
                        if (!in[0]) return;
                        auto dst = in[0]->data();
                        auto src = g.data();
                        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
                      });
}

}  // namespace ops

}  // namespace pixreg
