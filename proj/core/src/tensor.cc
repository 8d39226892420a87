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

#include "pixreg/tensor.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "pixreg/errors.h"

namespace pixreg {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kNotOnTape: return "not_on_tape";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kBadMagic: return "bad_magic";
    case ErrorCode::kBadVersion: return "bad_version";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kCountMismatch: return "count_mismatch";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

std::size_t ShapeVolume(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string ShapeToString(const Shape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

namespace {

void CheckShape(const Shape& shape) {
  Require(!shape.empty(), ErrorCode::kShapeMismatch, "tensor shape must have at least one dimension");
  for (std::size_t d : shape) {
    Require(d > 0, ErrorCode::kShapeMismatch,
            "tensor dimensions must be positive, got " + ShapeToString(shape));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)) {
  CheckShape(shape_);
  data_.assign(ShapeVolume(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  CheckShape(shape_);
  Require(ShapeVolume(shape_) == data_.size(), ErrorCode::kShapeMismatch,
          "shape " + ShapeToString(shape_) + " does not match " +
              std::to_string(data_.size()) + " elements");
}

std::size_t Tensor::Offset(std::initializer_list<std::size_t> index) const {
  Require(index.size() == shape_.size(), ErrorCode::kShapeMismatch,
          "index rank does not match tensor rank");
  std::size_t offset = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    Require(i < shape_[axis], ErrorCode::kInvalidArgument, "tensor index out of range");
    offset = offset * shape_[axis] + i;
    ++axis;
  }
  return offset;
}

float& Tensor::at(std::initializer_list<std::size_t> index) { return data_[Offset(index)]; }
float Tensor::at(std::initializer_list<std::size_t> index) const { return data_[Offset(index)]; }

Tensor Tensor::Reshaped(Shape shape) const {
  Require(ShapeVolume(shape) == data_.size(), ErrorCode::kShapeMismatch,
          "cannot reshape " + ShapeToString(shape_) + " to " + ShapeToString(shape));
  return Tensor(std::move(shape), data_);
}

void Tensor::Fill(float value) { std::fill(data_.begin(), data_.end(), value); }

void Tensor::AddInPlace(const Tensor& other) {
  Require(other.shape_ == shape_, ErrorCode::kShapeMismatch,
          "cannot add " + ShapeToString(other.shape_) + " to " + ShapeToString(shape_));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
}

Tensor Tensor::Rows(std::size_t begin, std::size_t count) const {
  Require(begin + count <= shape_[0] && count > 0, ErrorCode::kInvalidArgument,
          "row slice out of range");
  const std::size_t stride = data_.size() / shape_[0];
  Shape shape = shape_;
  shape[0] = count;
  return Tensor(std::move(shape),
                std::vector<float>(data_.begin() + begin * stride,
                                   data_.begin() + (begin + count) * stride));
}

std::span<const float> Tensor::Row(std::size_t i) const {
  const std::size_t stride = data_.size() / shape_[0];
  return std::span<const float>(data_).subspan(i * stride, stride);
}

std::span<float> Tensor::Row(std::size_t i) {
  const std::size_t stride = data_.size() / shape_[0];
  return std::span<float>(data_).subspan(i * stride, stride);
}

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

}  // namespace pixreg
