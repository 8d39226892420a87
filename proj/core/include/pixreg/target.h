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

#ifndef PIXREG_TARGET_H_
#define PIXREG_TARGET_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pixreg/binary_io.h"
#include "pixreg/similarity.h"
#include "pixreg/tensor.h"

namespace pixreg {

// How pixel similarities become regularization targets.
//   threshold / full : +-(1 - eps) beyond +-th, 0 inside, every pair counts
//   double           : as threshold with th, but pairs with th2 < |s| <= th
//                      are masked out (th > th2 > 0)
//   minus            : keep pairs with s < -th or |s| < th
//   plus             : keep pairs with s > th or |s| < th
//   low              : keep pairs with |s| < th
//   high             : keep pairs with |s| > th
//   pixel            : the raw similarity itself, clamped to +-(1 - eps)
enum class TargetMode : std::uint32_t {
  kThreshold = 0,
  kDouble = 1,
  kMinus = 2,
  kPlus = 3,
  kLow = 4,
  kHigh = 5,
  kFull = 6,
  kPixel = 7,
};

std::string_view TargetModeName(TargetMode mode);
TargetMode ParseTargetMode(std::string_view name);

struct TargetParams {
  TargetMode mode = TargetMode::kThreshold;
  double th = 0.8;
  double th2 = 0.0;  // only for kDouble
  double eps_clamp = 1e-6;

  void Validate() const;

  friend bool operator==(const TargetParams&, const TargetParams&) = default;
};

// Symmetric pairwise target over N images plus the mask of contributing
// pairs. Stored as the strict lower triangle of float32 values and a
// bit-packed mask, so the diagonal is never part of the loss.
class SimilarityTarget {
 public:
  SimilarityTarget() = default;
  SimilarityTarget(std::size_t n, TargetParams params);

  std::size_t size() const { return n_; }
  const TargetParams& params() const { return params_; }
  std::uint64_t pair_count() const { return PairCount(n_); }

  // Diagonal entries report value 0 and are never masked in.
  float value(std::size_t i, std::size_t j) const;
  bool masked(std::size_t i, std::size_t j) const;
  void Set(std::size_t i, std::size_t j, float value, bool masked);

  std::uint64_t CountMasked() const;

  std::span<const float> triangle() const { return values_; }
  std::span<const std::uint8_t> mask_bits() const { return mask_; }

  // Binary form, version 1, little-endian:
  //   "PXST", version u32, N u32, mode u32, th f64, th2 f64, eps f64,
  //   N(N-1)/2 float values (TriangleIndex order), ceil(N(N-1)/2 / 8) mask
  //   bytes (bit k of byte k/8, LSB first).
  Bytes Serialize() const;
  static SimilarityTarget Deserialize(std::span<const std::uint8_t> bytes);
  void SaveFile(const std::filesystem::path& path) const;
  static SimilarityTarget LoadFile(const std::filesystem::path& path);

  friend bool operator==(const SimilarityTarget&, const SimilarityTarget&) = default;

 private:
  std::size_t n_ = 0;
  TargetParams params_;
  std::vector<float> values_;
  std::vector<std::uint8_t> mask_;
};

// Target value and mask for one pixel similarity under `params`.
struct TargetEntry {
  float value;
  bool masked;
};
TargetEntry ClassifyPair(double s_pixel, const TargetParams& params);

// Builders over an (N, N) pixel-similarity matrix.
SimilarityTarget ThresholdTarget(const Tensor& s_pixel, double th, double eps_clamp);
SimilarityTarget DoubleThresholdTarget(const Tensor& s_pixel, double th1, double th2,
                                       double eps_clamp);
SimilarityTarget SubsetTarget(const Tensor& s_pixel, double th, double eps_clamp,
                              TargetMode mode);
SimilarityTarget BuildTarget(const Tensor& s_pixel, const TargetParams& params);

// Builds straight from images via the lower triangle (no dense N x N matrix).
SimilarityTarget BuildTargetFromImages(const Tensor& images, const TargetParams& params);

// arctanh of a stored target value. Values within float rounding of the
// clamp bound are evaluated at exactly +-(1 - eps_clamp) in double, since
// 1 - eps is generally not representable in float32.
double TargetArctanh(float value, double eps_clamp);

}  // namespace pixreg

#endif  // PIXREG_TARGET_H_
