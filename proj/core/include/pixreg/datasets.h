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


#ifndef PIXREG_DATASETS_H_
#define PIXREG_DATASETS_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pixreg/binary_io.h"
#include "pixreg/tensor.h"

namespace pixreg {

// Images (N, C, H, W) in [0, 1] with one label each. `source` names where the
// data came from and `transforms` lists every preprocessing step in order, so
// the pair fully describes how the tensor was produced.
struct LabeledImageSet {
  Tensor images;
  std::vector<int> labels;
  std::vector<int> coarse_labels;  // CIFAR-100 only
  int num_classes = 0;
  std::string source;
  std::vector<std::string> transforms;

  std::size_t size() const { return labels.size(); }
  std::size_t channels() const { return images.dim(1); }
  std::size_t height() const { return images.dim(2); }
  std::size_t width() const { return images.dim(3); }
  std::size_t pixels_per_image() const { return images.size() / size(); }

  std::string Provenance() const;
  void Validate() const;

  Tensor Batch(std::span<const std::size_t> indices) const;
  std::vector<int> BatchLabels(std::span<const std::size_t> indices) const;
  LabeledImageSet Subset(std::span<const std::size_t> indices, const std::string& note) const;
  LabeledImageSet Head(std::size_t n) const;
};

// IDX (MNIST family): big-endian magic 0x00000803 for images (N, H, W) and
// 0x00000801 for labels, then unsigned bytes. Pixels are scaled by 1/255.
LabeledImageSet ParseIdx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels,
                         const std::string& source);
LabeledImageSet LoadIdx(const std::filesystem::path& images, const std::filesystem::path& labels);
Bytes WriteIdxImages(const LabeledImageSet& set);
Bytes WriteIdxLabels(const LabeledImageSet& set);

// CIFAR binary batches: 3073-byte records (label, 3x32x32 channel-planar
// bytes) for CIFAR-10; 3074-byte records (coarse, fine, pixels) for
// CIFAR-100, where the fine label is the class.
enum class CifarVariant { k10, k100 };
LabeledImageSet ParseCifar(std::span<const std::uint8_t> bytes, CifarVariant variant,
                           const std::string& source);
LabeledImageSet LoadCifarBinary(std::span<const std::filesystem::path> paths,
                                CifarVariant variant);
Bytes WriteCifar(const LabeledImageSet& set, CifarVariant variant);

// Raw image stack, little-endian:
//   "PXIS", version u32 (1), N, C, H, W (u32 each), N*C*H*W f32 pixels,
//   label count u32 (0 or N), labels u32 each.
Bytes WriteStack(const LabeledImageSet& set);
LabeledImageSet ParseStack(std::span<const std::uint8_t> bytes, const std::string& source);
LabeledImageSet LoadStack(const std::filesystem::path& path);

// BT.601 luma 0.299 R + 0.587 G + 0.114 B. Requires C = 3.
LabeledImageSet ToGrayscale(const LabeledImageSet& set);

// Center-crops each image to a square and resizes it bilinearly (half-pixel
// centers, edge clamping) to (height, width).
LabeledImageSet CenterCropResize(const LabeledImageSet& set, std::size_t height,
                                 std::size_t width);

// Uniform sample of n images without replacement under `seed`.
LabeledImageSet SelectRegularizationImages(const LabeledImageSet& set, std::size_t n,
                                           std::uint64_t seed);

// Dataset ids used by configs and the CLI:
//   idx:<images>,<labels>   cifar10:<batch>[,<batch>...]   cifar100:<file>[,...]
//   stack:<file>
LabeledImageSet LoadDataset(std::string_view id);

}  // namespace pixreg

#endif  // PIXREG_DATASETS_H_
