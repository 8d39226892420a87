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


#include "pixreg/datasets.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pixreg/errors.h"
#include "pixreg/rng.h"

namespace pixreg {
namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

float ByteToUnit(std::uint8_t b) { return static_cast<float>(b) / 255.0f; }

std::uint8_t UnitToByte(float v) {
  Require(v >= 0.0f && v <= 1.0f, ErrorCode::kInvalidArgument,
          "pixel outside [0, 1] cannot be written as a byte");
  return static_cast<std::uint8_t>(std::lround(v * 255.0f));
}

int ClassCount(const std::vector<int>& labels) {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

std::string Join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> SplitComma(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    out.emplace_back(text.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string LabeledImageSet::Provenance() const {
  return transforms.empty() ? source : source + " | " + Join(transforms, " | ");
}

void LabeledImageSet::Validate() const {
  Require(images.rank() == 4, ErrorCode::kShapeMismatch,
          "image set must be (N, C, H, W), got " + ShapeToString(images.shape()));
  Require(images.dim(0) == labels.size(), ErrorCode::kCountMismatch,
          "image count " + std::to_string(images.dim(0)) + " != label count " +
              std::to_string(labels.size()));
  for (float v : images.data()) {
    Require(v >= 0.0f && v <= 1.0f, ErrorCode::kFormat, "pixel outside [0, 1]");
  }
  for (int l : labels) Require(l >= 0, ErrorCode::kFormat, "negative label");
}

Tensor LabeledImageSet::Batch(std::span<const std::size_t> indices) const {
  Require(!indices.empty(), ErrorCode::kInvalidArgument, "empty batch");
  Shape shape = images.shape();
  shape[0] = indices.size();
  Tensor out(shape);
  const std::size_t d = pixels_per_image();
  for (std::size_t b = 0; b < indices.size(); ++b) {
    Require(indices[b] < size(), ErrorCode::kInvalidArgument, "batch index out of range");
    auto src = images.Row(indices[b]);
    std::copy(src.begin(), src.end(), out.raw() + b * d);
  }
  return out;
}

std::vector<int> LabeledImageSet::BatchLabels(std::span<const std::size_t> indices) const {
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(labels.at(i));
  return out;
}

LabeledImageSet LabeledImageSet::Subset(std::span<const std::size_t> indices,
                                        const std::string& note) const {
  LabeledImageSet out;
  out.images = Batch(indices);
  out.labels = BatchLabels(indices);
  if (!coarse_labels.empty()) {
    for (std::size_t i : indices) out.coarse_labels.push_back(coarse_labels.at(i));
  }
  out.num_classes = num_classes;
  out.source = source;
  out.transforms = transforms;
  out.transforms.push_back(note);
  return out;
}

LabeledImageSet LabeledImageSet::Head(std::size_t n) const {
  if (n >= size()) return *this;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return Subset(idx, "head(" + std::to_string(n) + ")");
}

LabeledImageSet ParseIdx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels,
                         const std::string& source) {
  ByteReader ir(images, "idx images");
  const std::uint32_t imagic = ir.U32BigEndian();
  if (imagic != kIdxImagesMagic) {
    Fail(ErrorCode::kBadMagic, "idx images: bad magic (expected 0x00000803)");
  }
  const std::uint32_t n = ir.U32BigEndian();
  const std::uint32_t h = ir.U32BigEndian();
  const std::uint32_t w = ir.U32BigEndian();
  ByteReader lr(labels, "idx labels");
  const std::uint32_t lmagic = lr.U32BigEndian();
  if (lmagic != kIdxLabelsMagic) {
    Fail(ErrorCode::kBadMagic, "idx labels: bad magic (expected 0x00000801)");
  }
  const std::uint32_t ln = lr.U32BigEndian();
  if (ln != n) {
    Fail(ErrorCode::kCountMismatch, "idx: " + std::to_string(n) + " images but " +
                                        std::to_string(ln) + " labels");
  }
  Require(n > 0 && h > 0 && w > 0, ErrorCode::kFormat, "idx: empty dimension");
  const std::size_t count = static_cast<std::size_t>(n) * h * w;
  auto pixels = ir.Raw(count);
  if (ir.remaining() != 0) Fail(ErrorCode::kFormat, "idx images: trailing bytes");
  auto label_bytes = lr.Raw(n);
  if (lr.remaining() != 0) Fail(ErrorCode::kFormat, "idx labels: trailing bytes");

  LabeledImageSet set;
  set.images = Tensor({n, 1, h, w});
  for (std::size_t i = 0; i < count; ++i) set.images[i] = ByteToUnit(pixels[i]);
  set.labels.assign(label_bytes.begin(), label_bytes.end());
  set.num_classes = ClassCount(set.labels);
  set.source = source;
  set.transforms.push_back("scale(1/255)");
  return set;
}

LabeledImageSet LoadIdx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  return ParseIdx(ReadFileBytes(images), ReadFileBytes(labels),
                  "idx:" + images.string() + "," + labels.string());
}

Bytes WriteIdxImages(const LabeledImageSet& set) {
  Require(set.channels() == 1, ErrorCode::kInvalidArgument, "idx images are single-channel");
  ByteWriter w;
  w.U32BigEndian(kIdxImagesMagic);
  w.U32BigEndian(static_cast<std::uint32_t>(set.size()));
  w.U32BigEndian(static_cast<std::uint32_t>(set.height()));
  w.U32BigEndian(static_cast<std::uint32_t>(set.width()));
  for (float v : set.images.data()) w.U8(UnitToByte(v));
  return w.Take();
}

Bytes WriteIdxLabels(const LabeledImageSet& set) {
  ByteWriter w;
  w.U32BigEndian(kIdxLabelsMagic);
  w.U32BigEndian(static_cast<std::uint32_t>(set.size()));
  for (int l : set.labels) {
    Require(l >= 0 && l < 256, ErrorCode::kInvalidArgument, "idx labels must fit a byte");
    w.U8(static_cast<std::uint8_t>(l));
  }
  return w.Take();
}

namespace {

constexpr std::size_t kCifarPixels = 3 * 32 * 32;

std::size_t CifarRecordSize(CifarVariant v) {
  return (v == CifarVariant::k10 ? 1 : 2) + kCifarPixels;
}

}  // namespace

LabeledImageSet ParseCifar(std::span<const std::uint8_t> bytes, CifarVariant variant,
                           const std::string& source) {
  const std::size_t record = CifarRecordSize(variant);
  if (bytes.empty() || bytes.size() % record != 0) {
    Fail(ErrorCode::kTruncated, "cifar: file length " + std::to_string(bytes.size()) +
                                    " is not a positive multiple of " + std::to_string(record));
  }
  const std::size_t n = bytes.size() / record;
  LabeledImageSet set;
  set.images = Tensor({n, 3, 32, 32});
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* rec = bytes.data() + i * record;
    if (variant == CifarVariant::k10) {
      set.labels.push_back(rec[0]);
    } else {
      set.coarse_labels.push_back(rec[0]);
      set.labels.push_back(rec[1]);
    }
    const std::uint8_t* px = rec + (record - kCifarPixels);
    float* dst = set.images.raw() + i * kCifarPixels;
    for (std::size_t k = 0; k < kCifarPixels; ++k) dst[k] = ByteToUnit(px[k]);
  }
  set.num_classes = variant == CifarVariant::k10 ? 10 : 100;
  for (int l : set.labels) {
    Require(l < set.num_classes, ErrorCode::kFormat, "cifar: label out of range");
  }
  set.source = source;
  set.transforms.push_back("scale(1/255)");
  return set;
}

LabeledImageSet LoadCifarBinary(std::span<const std::filesystem::path> paths,
                                CifarVariant variant) {
  Require(!paths.empty(), ErrorCode::kInvalidArgument, "cifar: no files given");
  Bytes all;
  std::string source = variant == CifarVariant::k10 ? "cifar10:" : "cifar100:";
  for (std::size_t i = 0; i < paths.size(); ++i) {
    Bytes part = ReadFileBytes(paths[i]);
    if (part.size() % CifarRecordSize(variant) != 0) {
      Fail(ErrorCode::kTruncated, "cifar: '" + paths[i].string() + "' has a partial record");
    }
    all.insert(all.end(), part.begin(), part.end());
    source += (i ? "," : "") + paths[i].string();
  }
  return ParseCifar(all, variant, source);
}

Bytes WriteCifar(const LabeledImageSet& set, CifarVariant variant) {
  Require(set.channels() == 3 && set.height() == 32 && set.width() == 32,
          ErrorCode::kInvalidArgument, "cifar records hold 3x32x32 images");
  Require(variant == CifarVariant::k10 || set.coarse_labels.size() == set.size(),
          ErrorCode::kInvalidArgument, "cifar100 output needs coarse labels");
  ByteWriter w;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (variant == CifarVariant::k100) w.U8(static_cast<std::uint8_t>(set.coarse_labels[i]));
    w.U8(static_cast<std::uint8_t>(set.labels[i]));
    for (float v : set.images.Row(i)) w.U8(UnitToByte(v));
  }
  return w.Take();
}

Bytes WriteStack(const LabeledImageSet& set) {
  ByteWriter w;
  w.Magic("PXIS");
  w.U32(1);
  for (std::size_t axis = 0; axis < 4; ++axis) {
    w.U32(static_cast<std::uint32_t>(set.images.dim(axis)));
  }
  w.F32s(set.images.data());
  w.U32(static_cast<std::uint32_t>(set.labels.size()));
  for (int l : set.labels) w.U32(static_cast<std::uint32_t>(l));
  return w.Take();
}

LabeledImageSet ParseStack(std::span<const std::uint8_t> bytes, const std::string& source) {
  ByteReader r(bytes, "image stack");
  if (!r.MagicIs("PXIS")) Fail(ErrorCode::kBadMagic, "image stack: bad magic");
  if (r.U32() != 1) Fail(ErrorCode::kBadVersion, "image stack: unsupported version");
  Shape shape(4);
  for (auto& d : shape) {
    d = r.U32();
    Require(d > 0, ErrorCode::kFormat, "image stack: zero dimension");
  }
  LabeledImageSet set;
  std::vector<float> pixels(ShapeVolume(shape));
  r.F32s(pixels);
  set.images = Tensor(shape, std::move(pixels));
  const std::uint32_t label_count = r.U32();
  if (label_count != 0 && label_count != shape[0]) {
    Fail(ErrorCode::kCountMismatch, "image stack: label count does not match image count");
  }
  r.Need(static_cast<std::size_t>(label_count) * 4);
  for (std::uint32_t i = 0; i < label_count; ++i) set.labels.push_back(static_cast<int>(r.U32()));
  if (r.remaining() != 0) Fail(ErrorCode::kFormat, "image stack: trailing bytes");
  // Unlabeled stacks (regularization-only data) carry label 0 throughout.
  if (label_count == 0) set.labels.assign(shape[0], 0);
  set.num_classes = ClassCount(set.labels);
  set.source = source;
  set.Validate();
  return set;
}

LabeledImageSet LoadStack(const std::filesystem::path& path) {
  return ParseStack(ReadFileBytes(path), "stack:" + path.string());
}

LabeledImageSet ToGrayscale(const LabeledImageSet& set) {
  Require(set.channels() == 3, ErrorCode::kInvalidArgument,
          "grayscale conversion needs 3 channels, got " + std::to_string(set.channels()));
  const std::size_t n = set.size(), plane = set.height() * set.width();
  LabeledImageSet out = set;
  out.images = Tensor({n, 1, set.height(), set.width()});
  for (std::size_t i = 0; i < n; ++i) {
    const float* src = set.images.raw() + i * 3 * plane;
    float* dst = out.images.raw() + i * plane;
    for (std::size_t k = 0; k < plane; ++k) {
      const double y = 0.299 * src[k] + 0.587 * src[plane + k] + 0.114 * src[2 * plane + k];
      dst[k] = static_cast<float>(std::clamp(y, 0.0, 1.0));
    }
  }
  out.transforms.push_back("grayscale(bt601: 0.299 R + 0.587 G + 0.114 B)");
  return out;
}

LabeledImageSet CenterCropResize(const LabeledImageSet& set, std::size_t height,
                                 std::size_t width) {
  Require(height > 0 && width > 0, ErrorCode::kInvalidArgument, "resize target must be positive");
  const std::size_t n = set.size(), c = set.channels(), h = set.height(), w = set.width();
  const std::size_t side = std::min(h, w);
  const std::size_t top = (h - side) / 2, left = (w - side) / 2;
  const double sy = static_cast<double>(side) / static_cast<double>(height);
  const double sx = static_cast<double>(side) / static_cast<double>(width);
  LabeledImageSet out = set;
  out.images = Tensor({n, c, height, width});
  auto sample = [&](const float* plane, double y, double x) {
    y = std::clamp(y, 0.0, static_cast<double>(side - 1));
    x = std::clamp(x, 0.0, static_cast<double>(side - 1));
    const std::size_t y0 = static_cast<std::size_t>(y), x0 = static_cast<std::size_t>(x);
    const std::size_t y1 = std::min(y0 + 1, side - 1), x1 = std::min(x0 + 1, side - 1);
    const double fy = y - static_cast<double>(y0), fx = x - static_cast<double>(x0);
    auto at = [&](std::size_t yy, std::size_t xx) {
      return static_cast<double>(plane[(top + yy) * w + left + xx]);
    };
    return (1 - fy) * ((1 - fx) * at(y0, x0) + fx * at(y0, x1)) +
           fy * ((1 - fx) * at(y1, x0) + fx * at(y1, x1));
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const float* src = set.images.raw() + (i * c + ch) * h * w;
      float* dst = out.images.raw() + (i * c + ch) * height * width;
      for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
          const double v = sample(src, (static_cast<double>(y) + 0.5) * sy - 0.5,
                                  (static_cast<double>(x) + 0.5) * sx - 0.5);
          dst[y * width + x] = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
      }
    }
  }
  std::ostringstream note;
  note << "center_crop(" << side << "x" << side << ")+bilinear(" << height << "x" << width << ")";
  out.transforms.push_back(note.str());
  return out;
}

LabeledImageSet SelectRegularizationImages(const LabeledImageSet& set, std::size_t n,
                                           std::uint64_t seed) {
  Require(n > 0 && n <= set.size(), ErrorCode::kInvalidArgument,
          "cannot select " + std::to_string(n) + " regularization images from " +
              std::to_string(set.size()));
  std::vector<std::size_t> idx(set.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng = MakeRng(seed, streams::kSelect);
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(n);
  return set.Subset(idx, "select(n=" + std::to_string(n) + ", seed=" + std::to_string(seed) + ")");
}

LabeledImageSet LoadDataset(std::string_view id) {
  const std::size_t colon = id.find(':');
  Require(colon != std::string_view::npos, ErrorCode::kConfig,
          "dataset id '" + std::string(id) + "' lacks a '<kind>:' prefix");
  const std::string_view kind = id.substr(0, colon);
  const std::vector<std::string> parts = SplitComma(id.substr(colon + 1));
  if (kind == "idx") {
    Require(parts.size() == 2, ErrorCode::kConfig, "idx dataset needs '<images>,<labels>'");
    return LoadIdx(parts[0], parts[1]);
  }
  if (kind == "cifar10" || kind == "cifar100") {
    std::vector<std::filesystem::path> paths(parts.begin(), parts.end());
    return LoadCifarBinary(paths, kind == "cifar10" ? CifarVariant::k10 : CifarVariant::k100);
  }
  if (kind == "stack") {
    Require(parts.size() == 1, ErrorCode::kConfig, "stack dataset takes one file");
    return LoadStack(parts[0]);
  }
  Fail(ErrorCode::kConfig, "unknown dataset kind '" + std::string(kind) + "'");
}

}  // namespace pixreg
