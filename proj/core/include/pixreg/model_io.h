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

// Model file format, version 1. All integers are little-endian u32 unless
// noted; floats are little-endian IEEE-754 binary32.
//
//   magic        "PXNN" (4 bytes)
//   version      1
//   in_channels, in_height, in_width
//   layer_count, then per layer:
//     kind (u8: 1 conv, 2 relu, 3 pool, 4 fc)
//     out_channels, kernel, stride, padding, skip, pool, out_features
//   tap_count, tap indices
//   param_count, then per parameter:
//     rank, dims[rank], float data (product(dims) values)
//   mixer_count, mixer logits (float)        -- 0 when no mixer is stored
//
// Trailing bytes after the mixer block are rejected as kFormat.

#ifndef PIXREG_MODEL_IO_H_
#define PIXREG_MODEL_IO_H_

#include <filesystem>
#include <span>
#include <vector>

#include "pixreg/binary_io.h"
#include "pixreg/tapnet.h"

namespace pixreg {

inline constexpr std::uint32_t kModelFormatVersion = 1;

struct LoadedModel {
  TapNet net;
  std::vector<float> mixer_logits;
};

Bytes SaveModel(const TapNet& net, std::span<const float> mixer_logits = {});
// Throws kBadMagic, kBadVersion, kTruncated or kFormat; never returns a
// partially filled model.
LoadedModel LoadModel(std::span<const std::uint8_t> bytes);

void SaveModelFile(const std::filesystem::path& path, const TapNet& net,
                   std::span<const float> mixer_logits = {});
LoadedModel LoadModelFile(const std::filesystem::path& path);

}  // namespace pixreg

#endif  // PIXREG_MODEL_IO_H_
