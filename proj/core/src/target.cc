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

#include "pixreg/target.h"

#include <algorithm>
#include <bit>
#include <cmath>

#include "pixreg/errors.h"

namespace pixreg {

std::string_view TargetModeName(TargetMode mode) {
  switch (mode) {
    case TargetMode::kThreshold: return "threshold";
    case TargetMode::kDouble: return "double";
    case TargetMode::kMinus: return "minus";
    case TargetMode::kPlus: return "plus";
    case TargetMode::kLow: return "low";
    case TargetMode::kHigh: return "high";
    case TargetMode::kFull: return "full";
    case TargetMode::kPixel: return "pixel";
  }
  return "?";
}

TargetMode ParseTargetMode(std::string_view name) {
  for (auto mode : {TargetMode::kThreshold, TargetMode::kDouble, TargetMode::kMinus,
                    TargetMode::kPlus, TargetMode::kLow, TargetMode::kHigh, TargetMode::kFull,
                    TargetMode::kPixel}) {
    if (TargetModeName(mode) == name) return mode;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown target mode '" + std::string(name) + "'");
}

void TargetParams::Validate() const {
  Require(eps_clamp > 0.0 && eps_clamp < 0.5, ErrorCode::kInvalidArgument,
          "eps_clamp must lie in (0, 0.5)");
  if (mode == TargetMode::kPixel) return;
  Require(th > 0.0 && th < 1.0, ErrorCode::kInvalidArgument, "threshold must lie in (0, 1)");
  if (mode == TargetMode::kDouble) {
    Require(th2 > 0.0 && th > th2, ErrorCode::kInvalidArgument,
            "double threshold needs th1 > th2 > 0");
  }
}

TargetEntry ClassifyPair(double s, const TargetParams& p) {
  const float hi = static_cast<float>(1.0 - p.eps_clamp);
  const double a = std::abs(s);
  auto thresholded = [&](double th) -> float {
    if (s > th) return hi;
    if (s < -th) return -hi;
    return 0.0f;
  };
  switch (p.mode) {
    case TargetMode::kThreshold:
    case TargetMode::kFull:
      return {thresholded(p.th), true};
    case TargetMode::kDouble:
      if (a > p.th2 && a <= p.th) return {0.0f, false};
      return {thresholded(p.th), true};
    case TargetMode::kMinus:
      return {thresholded(p.th), s < -p.th || a < p.th};
    case TargetMode::kPlus:
      return {thresholded(p.th), s > p.th || a < p.th};
    case TargetMode::kLow:
      return {thresholded(p.th), a < p.th};
    case TargetMode::kHigh:
      return {thresholded(p.th), a > p.th};
    case TargetMode::kPixel:
      return {static_cast<float>(std::clamp(s, -(1.0 - p.eps_clamp), 1.0 - p.eps_clamp)), true};
  }
  Fail(ErrorCode::kInvalidArgument, "unknown target mode");
}

SimilarityTarget::SimilarityTarget(std::size_t n, TargetParams params)
    : n_(n), params_(params) {
  Require(n >= 2, ErrorCode::kInvalidArgument, "a similarity target needs at least two images");
  params_.Validate();
  values_.assign(PairCount(n), 0.0f);
  mask_.assign((values_.size() + 7) / 8, 0);
}

float SimilarityTarget::value(std::size_t i, std::size_t j) const {
  Require(i < n_ && j < n_, ErrorCode::kInvalidArgument, "target index out of range");
  return i == j ? 0.0f : values_[TriangleIndex(i, j)];
}

bool SimilarityTarget::masked(std::size_t i, std::size_t j) const {
  Require(i < n_ && j < n_, ErrorCode::kInvalidArgument, "target index out of range");
  if (i == j) return false;
  const std::uint64_t k = TriangleIndex(i, j);
  return (mask_[k / 8] >> (k % 8)) & 1u;
}

void SimilarityTarget::Set(std::size_t i, std::size_t j, float value, bool masked) {
  Require(i < n_ && j < n_ && i != j, ErrorCode::kInvalidArgument,
          "target entries are defined for i != j only");
  const double bound = 1.0 - params_.eps_clamp;
  Require(std::abs(static_cast<double>(value)) <= bound + 1e-7, ErrorCode::kInvalidArgument,
          "target value outside the clamp bound");
  const std::uint64_t k = TriangleIndex(i, j);
  values_[k] = value;
  const auto bit = static_cast<std::uint8_t>(1u << (k % 8));
  mask_[k / 8] = masked ? (mask_[k / 8] | bit) : (mask_[k / 8] & ~bit);
}

std::uint64_t SimilarityTarget::CountMasked() const {
  std::uint64_t total = 0;
  for (std::uint8_t b : mask_) total += static_cast<std::uint64_t>(std::popcount(b));
  return total;
}

Bytes SimilarityTarget::Serialize() const {
  ByteWriter w;
  w.Magic("PXST");
  w.U32(1);
  w.U32(static_cast<std::uint32_t>(n_));
  w.U32(static_cast<std::uint32_t>(params_.mode));
  w.F64(params_.th);
  w.F64(params_.th2);
  w.F64(params_.eps_clamp);
  w.F32s(values_);
  w.Raw(mask_);
  return w.Take();
}

SimilarityTarget SimilarityTarget::Deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "similarity target");
  if (!r.MagicIs("PXST")) Fail(ErrorCode::kBadMagic, "similarity target: bad magic");
  const std::uint32_t version = r.U32();
  if (version != 1) Fail(ErrorCode::kBadVersion, "similarity target: unsupported version");
  const std::uint32_t n = r.U32();
  const std::uint32_t mode = r.U32();
  if (mode > static_cast<std::uint32_t>(TargetMode::kPixel)) {
    Fail(ErrorCode::kFormat, "similarity target: unknown mode");
  }
  TargetParams params;
  params.mode = static_cast<TargetMode>(mode);
  params.th = r.F64();
  params.th2 = r.F64();
  params.eps_clamp = r.F64();
  if (n < 2) Fail(ErrorCode::kFormat, "similarity target: N < 2");
  SimilarityTarget out(n, params);
  r.F32s(out.values_);
  auto mask = r.Raw(out.mask_.size());
  std::copy(mask.begin(), mask.end(), out.mask_.begin());
  if (r.remaining() != 0) Fail(ErrorCode::kFormat, "similarity target: trailing bytes");
  return out;
}

void SimilarityTarget::SaveFile(const std::filesystem::path& path) const {
  WriteFileBytes(path, Serialize());
}

SimilarityTarget SimilarityTarget::LoadFile(const std::filesystem::path& path) {
  return Deserialize(ReadFileBytes(path));
}

namespace {

void CheckSimilarityMatrix(const Tensor& s) {
  Require(s.rank() == 2 && s.dim(0) == s.dim(1), ErrorCode::kShapeMismatch,
          "pixel similarity must be a square matrix, got " + ShapeToString(s.shape()));
  const std::size_t n = s.dim(0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const float a = s.at({i, j});
      Require(a == s.at({j, i}), ErrorCode::kInvalidArgument, "pixel similarity is not symmetric");
      Require(a >= -1.0f && a <= 1.0f, ErrorCode::kInvalidArgument,
              "pixel similarity entries must lie in [-1, 1]");
    }
  }
}

}  // namespace

SimilarityTarget BuildTarget(const Tensor& s_pixel, const TargetParams& params) {
  params.Validate();
  CheckSimilarityMatrix(s_pixel);
  const std::size_t n = s_pixel.dim(0);
  SimilarityTarget target(n, params);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const TargetEntry e = ClassifyPair(s_pixel.at({i, j}), params);
      target.Set(i, j, e.value, e.masked);
    }
  }
  return target;
}

SimilarityTarget ThresholdTarget(const Tensor& s_pixel, double th, double eps_clamp) {
  return BuildTarget(s_pixel, {TargetMode::kThreshold, th, 0.0, eps_clamp});
}

SimilarityTarget DoubleThresholdTarget(const Tensor& s_pixel, double th1, double th2,
                                       double eps_clamp) {
  return BuildTarget(s_pixel, {TargetMode::kDouble, th1, th2, eps_clamp});
}

SimilarityTarget SubsetTarget(const Tensor& s_pixel, double th, double eps_clamp,
                              TargetMode mode) {
  Require(mode == TargetMode::kMinus || mode == TargetMode::kPlus || mode == TargetMode::kLow ||
              mode == TargetMode::kHigh || mode == TargetMode::kFull,
          ErrorCode::kInvalidArgument,
          "subset mode must be one of minus, plus, low, high, full");
  return BuildTarget(s_pixel, {mode, th, 0.0, eps_clamp});
}

SimilarityTarget BuildTargetFromImages(const Tensor& images, const TargetParams& params) {
  params.Validate();
  const std::vector<float> tri = PixelSimilarityTriangle(images);
  const std::size_t n = images.dim(0);
  SimilarityTarget target(n, params);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const TargetEntry e = ClassifyPair(tri[TriangleIndex(i, j)], params);
      target.Set(i, j, e.value, e.masked);
    }
  }
  return target;
}

double TargetArctanh(float value, double eps_clamp) {
  const double bound = 1.0 - eps_clamp;
  double t = value;
  // float32 spacing near 1 is ~6e-8, so "within two eps of the bound" can only
  // mean the stored value was meant to be the bound itself.
  if (std::abs(t) >= 1.0 - 2.0 * eps_clamp) t = std::copysign(bound, t);
  return std::atanh(t);
}

}  // namespace pixreg
