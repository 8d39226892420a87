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

// Reverse-mode automatic differentiation over Tensor values.
//
// A Tape records every operation applied to its Vars together with a
// backward closure. Backward() walks the record in reverse and accumulates
// gradients into the leaves: model Parameters (returned as a GradientMap)
// and differentiable Inputs (queried with Grad()). Tapes are single-use and
// single-owner; a tape built in inference mode stores values only.

#ifndef PIXREG_AUTODIFF_H_
#define PIXREG_AUTODIFF_H_

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pixreg/tensor.h"

namespace pixreg {

// A named trainable tensor. Identity (the address) is what gradients key on.
struct Parameter {
  std::string name;
  Tensor value;
};

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
// owning tape is alive.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Receives the output gradient and one slot per input. A slot is null when
// that input does not require a gradient; otherwise the closure must ADD its
// contribution into the slot.
using BackwardFn =
    std::function<void(const Tensor& grad_out, std::span<Tensor* const> grad_inputs)>;

// Gradients for every Parameter bound on a tape, in binding order.
class GradientMap {
 public:
  const Tensor* Find(const Parameter& p) const;
  // Throws kNotOnTape when `p` was never bound to the tape.
  const Tensor& at(const Parameter& p) const;

  const std::vector<std::pair<const Parameter*, Tensor>>& entries() const { return entries_; }
  void Add(const Parameter* p, Tensor grad) { entries_.emplace_back(p, std::move(grad)); }

 private:
  std::vector<std::pair<const Parameter*, Tensor>> entries_;
};

class Tape {
 public:
  enum class Mode { kRecord, kInference };

  explicit Tape(Mode mode = Mode::kRecord) : mode_(mode) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return mode_ == Mode::kRecord; }

  // Leaf that never receives a gradient.
  Var Constant(Tensor value);
  // Differentiable leaf; its gradient is available through Grad() after Backward().
  Var Input(Tensor value);
  // Binds a parameter. Binding the same parameter twice returns the same Var.
  Var Bind(Parameter& parameter);

  // Records a derived value. `backward` is dropped when no input requires a
  // gradient or the tape is in inference mode.
  Var Record(Tensor value, std::span<const Var> inputs, BackwardFn backward);
  Var Record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
    return Record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                  std::move(backward));
  }

  bool RequiresGrad(Var v) const;

  // Propagates d(loss)/d(.) through the record. `loss` must hold exactly one
  // element. May be called once per tape.
  GradientMap Backward(Var loss);

  // Gradient of a differentiable leaf after Backward(). Throws kNotOnTape for
  // Vars from another tape, constants, or when Backward() has not run.
  const Tensor& Grad(Var v) const;

  const Tensor& ValueOf(const Var& v) const;
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    bool is_input = false;
    Parameter* parameter = nullptr;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
  };

  void CheckOwned(const Var& v) const;

  Mode mode_;
  bool consumed_ = false;
  std::deque<Node> nodes_;
  std::vector<std::pair<Parameter*, std::size_t>> bound_;
};

namespace ops {

Var Add(Var a, Var b);
Var Scale(Var a, float factor);
// Sum of all elements, as a one-element tensor.
Var Sum(Var a);
Var Mean(Var a);
Var Relu(Var a);
Var Reshape(Var a, Shape shape);

}  // namespace ops

}  // namespace pixreg

#endif  // PIXREG_AUTODIFF_H_
