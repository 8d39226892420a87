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


#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "doctest.h"
#include "pixreg/datasets.h"
#include "pixreg/model_io.h"
#include "pixreg/similarity.h"
#include "support.h"

using namespace pixreg;
using testing::ErrorOf;

namespace {

void PutBigEndian(Bytes& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

Bytes IdxImages(std::uint32_t n, std::uint32_t h, std::uint32_t w,
                const std::vector<std::uint8_t>& pixels) {
  Bytes out;
  PutBigEndian(out, 0x00000803);
  PutBigEndian(out, n);
  PutBigEndian(out, h);
  PutBigEndian(out, w);
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

Bytes IdxLabels(const std::vector<std::uint8_t>& labels, std::uint32_t magic = 0x00000801) {
  Bytes out;
  PutBigEndian(out, magic);
  PutBigEndian(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

std::uint32_t ReadBigEndian(const Bytes& b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

Bytes CifarRecords(std::size_t n, CifarVariant variant, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> byte(0, 255);
  Bytes out;
  for (std::size_t i = 0; i < n; ++i) {
    if (variant == CifarVariant::k100) out.push_back(static_cast<std::uint8_t>(byte(rng) % 20));
    out.push_back(static_cast<std::uint8_t>(byte(rng) % (variant == CifarVariant::k10 ? 10 : 100)));
    for (int k = 0; k < 3072; ++k) out.push_back(static_cast<std::uint8_t>(byte(rng)));
  }
  return out;
}

LabeledImageSet RandomSet(std::size_t n, std::size_t c, std::size_t h, std::size_t w,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  LabeledImageSet set;
  set.images = testing::RandomTensor({n, c, h, w}, rng, 0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) set.labels.push_back(static_cast<int>(i % 10));
  set.num_classes = 10;
  set.source = "synthetic";
  return set;
}

bool InUnitRange(const Tensor& t) {
  return std::all_of(t.data().begin(), t.data().end(),
                     [](float v) { return v >= 0.0f && v <= 1.0f; });
}

}  // namespace

TEST_CASE("idx fixture scales byte endpoints exactly") {
  const Bytes images = IdxImages(2, 2, 2, {0, 255, 128, 1, 255, 0, 0, 255});
  const Bytes labels = IdxLabels({3, 7});
  const LabeledImageSet set = ParseIdx(images, labels, "fixture");
  REQUIRE(set.images.shape() == Shape{2, 1, 2, 2});
  CHECK(set.images[0] == 0.0f);
  CHECK(set.images[1] == 1.0f);
  CHECK(set.images[4] == 1.0f);
  CHECK(set.images[5] == 0.0f);
  CHECK(set.images[2] == doctest::Approx(128.0 / 255.0).epsilon(1e-7));
  CHECK(set.labels == std::vector<int>{3, 7});
  CHECK(set.Provenance() == "fixture | scale(1/255)");
  CHECK_NOTHROW(set.Validate());
}

TEST_CASE("idx error paths are distinct") {
  const Bytes images = IdxImages(2, 2, 2, {0, 1, 2, 3, 4, 5, 6, 7});
  CHECK(ErrorOf([&] { (void)ParseIdx(images, IdxLabels({1, 2}, 0x00000803), "x"); }) ==
        ErrorCode::kBadMagic);
  CHECK(ErrorOf([&] { (void)ParseIdx(IdxLabels({1, 2}), IdxLabels({1, 2}), "x"); }) ==
        ErrorCode::kBadMagic);
  CHECK(ErrorOf([&] { (void)ParseIdx(images, IdxLabels({1, 2, 3}), "x"); }) ==
        ErrorCode::kCountMismatch);
  Bytes short_images = images;
  short_images.pop_back();
  CHECK(ErrorOf([&] { (void)ParseIdx(short_images, IdxLabels({1, 2}), "x"); }) ==
        ErrorCode::kTruncated);
  Bytes short_labels = IdxLabels({1, 2});
  short_labels.pop_back();
  CHECK(ErrorOf([&] { (void)ParseIdx(images, short_labels, "x"); }) == ErrorCode::kTruncated);
  Bytes long_images = images;
  long_images.push_back(0);
  CHECK(ErrorOf([&] { (void)ParseIdx(long_images, IdxLabels({1, 2}), "x"); }) ==
        ErrorCode::kFormat);
  CHECK(ErrorOf([] { (void)LoadIdx("/nonexistent/a", "/nonexistent/b"); }) == ErrorCode::kIo);
}

TEST_CASE("mnist files: counts agree with the file header") {
  const std::filesystem::path dir = testing::DataDir() + "/mnist";
  struct Split {
    const char* images;
    const char* labels;
  };
  for (const Split& s : {Split{"train-images-idx3-ubyte", "train-labels-idx1-ubyte"},
                         Split{"t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"}}) {
    CAPTURE(s.images);
    const Bytes raw = ReadFileBytes(dir / s.images);
    const std::uint32_t header_n = ReadBigEndian(raw, 4);
    const std::uint32_t h = ReadBigEndian(raw, 8), w = ReadBigEndian(raw, 12);
    CHECK(raw.size() == 16 + std::size_t{header_n} * h * w);
    const LabeledImageSet set = LoadIdx(dir / s.images, dir / s.labels);
    CHECK(set.size() == header_n);
    CHECK(set.images.shape() == Shape{header_n, 1, 28, 28});
    CHECK(set.num_classes == 10);
    CHECK(InUnitRange(set.images));
    CHECK(std::all_of(set.labels.begin(), set.labels.end(),
                      [](int l) { return l >= 0 && l < 10; }));
  }
  CHECK(LoadDataset(testing::MnistTrain()).size() == 10000);
  CHECK(LoadDataset(testing::MnistTest()).size() == 5000);
}

TEST_CASE("idx re-serialization is bit-exact") {
  std::vector<std::uint8_t> px(3 * 5 * 4);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint8_t>(i * 17 % 256);
  const Bytes images = IdxImages(3, 5, 4, px);
  const Bytes labels = IdxLabels({0, 9, 4});
  const LabeledImageSet set = ParseIdx(images, labels, "fixture");
  CHECK(WriteIdxImages(set) == images);
  CHECK(WriteIdxLabels(set) == labels);

  const std::filesystem::path dir = testing::DataDir() + "/mnist";
  const Bytes raw = ReadFileBytes(dir / "t10k-images-idx3-ubyte");
  const Bytes raw_labels = ReadFileBytes(dir / "t10k-labels-idx1-ubyte");
  const LabeledImageSet mnist = ParseIdx(raw, raw_labels, "t10k");
  CHECK(WriteIdxImages(mnist) == raw);
  CHECK(WriteIdxLabels(mnist) == raw_labels);
}

TEST_CASE("cifar: record counts and round-trips") {
  SUBCASE("cifar-10 single record") {
    const Bytes rec = CifarRecords(1, CifarVariant::k10, 5);
    const LabeledImageSet set = ParseCifar(rec, CifarVariant::k10, "fixture");
    REQUIRE(set.images.shape() == Shape{1, 3, 32, 32});
    CHECK(set.labels[0] == rec[0]);
    CHECK(set.images[0] == static_cast<float>(rec[1]) / 255.0f);
    CHECK(set.images[1024] == static_cast<float>(rec[1 + 1024]) / 255.0f);
    CHECK(WriteCifar(set, CifarVariant::k10) == rec);
  }
  SUBCASE("cifar-100 single record") {
    const Bytes rec = CifarRecords(1, CifarVariant::k100, 6);
    const LabeledImageSet set = ParseCifar(rec, CifarVariant::k100, "fixture");
    CHECK(set.coarse_labels[0] == rec[0]);
    CHECK(set.labels[0] == rec[1]);
    CHECK(set.num_classes == 100);
    CHECK(WriteCifar(set, CifarVariant::k100) == rec);
  }
  SUBCASE("batch-sized file") {
    const Bytes batch = CifarRecords(10000, CifarVariant::k10, 7);
    const LabeledImageSet set = ParseCifar(batch, CifarVariant::k10, "fixture");
    CHECK(set.size() == batch.size() / 3073);
    CHECK(set.size() == 10000);
    CHECK(InUnitRange(set.images));
    CHECK(WriteCifar(set, CifarVariant::k10) == batch);
  }
  SUBCASE("partial records") {
    Bytes rec = CifarRecords(2, CifarVariant::k10, 8);
    rec.pop_back();
    CHECK(ErrorOf([&] { (void)ParseCifar(rec, CifarVariant::k10, "x"); }) ==
          ErrorCode::kTruncated);
    CHECK(ErrorOf([] { (void)ParseCifar({}, CifarVariant::k10, "x"); }) == ErrorCode::kTruncated);
    const Bytes rec10 = CifarRecords(1, CifarVariant::k10, 9);
    CHECK(ErrorOf([&] { (void)ParseCifar(rec10, CifarVariant::k100, "x"); }) ==
          ErrorCode::kTruncated);
  }
  SUBCASE("files and dataset ids") {
    testing::TempDir tmp;
    const Bytes a = CifarRecords(2, CifarVariant::k10, 10);
    const Bytes b = CifarRecords(3, CifarVariant::k10, 11);
    WriteFileBytes(tmp / "a.bin", a);
    WriteFileBytes(tmp / "b.bin", b);
    const LabeledImageSet set =
        LoadDataset("cifar10:" + (tmp / "a.bin").string() + "," + (tmp / "b.bin").string());
    CHECK(set.size() == 5);
    Bytes both = a;
    both.insert(both.end(), b.begin(), b.end());
    CHECK(WriteCifar(set, CifarVariant::k10) == both);
    Bytes cut = a;
    cut.resize(cut.size() - 10);
    WriteFileBytes(tmp / "cut.bin", cut);
    CHECK(ErrorOf([&] { (void)LoadDataset("cifar10:" + (tmp / "cut.bin").string()); }) ==
          ErrorCode::kTruncated);
  }
}

TEST_CASE("image stack round-trip and errors") {
  const LabeledImageSet set = RandomSet(4, 3, 5, 6, 12);
  const Bytes bytes = WriteStack(set);
  CHECK(bytes.size() == 4 + 4 + 16 + 4 * 3 * 5 * 6 * 4 + 4 + 4 * 4);
  const LabeledImageSet back = ParseStack(bytes, "stack:fixture");
  CHECK(back.images == set.images);
  CHECK(back.labels == set.labels);
  CHECK(WriteStack(back) == bytes);

  Bytes bad = bytes;
  bad[0] = 'Q';
  CHECK(ErrorOf([&] { (void)ParseStack(bad, "x"); }) == ErrorCode::kBadMagic);
  bad = bytes;
  bad[4] = 2;
  CHECK(ErrorOf([&] { (void)ParseStack(bad, "x"); }) == ErrorCode::kBadVersion);
  bad = bytes;
  bad.resize(bytes.size() - 3);
  CHECK(ErrorOf([&] { (void)ParseStack(bad, "x"); }) == ErrorCode::kTruncated);
  bad = bytes;
  bad.push_back(0);
  CHECK(ErrorOf([&] { (void)ParseStack(bad, "x"); }) == ErrorCode::kFormat);

  testing::TempDir tmp;
  WriteFileBytes(tmp / "s.pxis", bytes);
  CHECK(LoadDataset("stack:" + (tmp / "s.pxis").string()).images == set.images);
}

TEST_CASE("dataset ids") {
  CHECK(ErrorOf([] { (void)LoadDataset("mnist"); }) == ErrorCode::kConfig);
  CHECK(ErrorOf([] { (void)LoadDataset("png:/tmp/x"); }) == ErrorCode::kConfig);
  CHECK(ErrorOf([] { (void)LoadDataset("idx:/only/one"); }) == ErrorCode::kConfig);
}

TEST_CASE("grayscale conversion") {
  SUBCASE("gray stays gray") {
    LabeledImageSet set = RandomSet(1, 3, 4, 4, 1);
    for (std::size_t k = 0; k < 16; ++k) {
      const float v = static_cast<float>(k) / 15.0f;
      for (std::size_t c = 0; c < 3; ++c) set.images[c * 16 + k] = v;
    }
    const LabeledImageSet g = ToGrayscale(set);
    REQUIRE(g.images.shape() == Shape{1, 1, 4, 4});
    for (std::size_t k = 0; k < 16; ++k) {
      CHECK(g.images[k] == doctest::Approx(static_cast<float>(k) / 15.0f).epsilon(1e-7));
    }
  }
  SUBCASE("pure red") {
    LabeledImageSet set = RandomSet(1, 3, 2, 2, 2);
    std::fill(set.images.data().begin(), set.images.data().end(), 0.0f);
    for (std::size_t k = 0; k < 4; ++k) set.images[k] = 1.0f;
    const LabeledImageSet g = ToGrayscale(set);
    for (std::size_t k = 0; k < 4; ++k) CHECK(g.images[k] == doctest::Approx(0.299).epsilon(1e-7));
  }
  SUBCASE("random images match the direct formula") {
    const LabeledImageSet set = RandomSet(8, 3, 7, 9, 3);
    const LabeledImageSet g = ToGrayscale(set);
    const std::size_t plane = 63;
    double worst = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
      for (std::size_t k = 0; k < plane; ++k) {
        const double r = set.images[i * 3 * plane + k];
        const double gg = set.images[i * 3 * plane + plane + k];
        const double b = set.images[i * 3 * plane + 2 * plane + k];
        worst = std::max(worst, std::abs(g.images[i * plane + k] - (0.299 * r + 0.587 * gg + 0.114 * b)));
      }
    }
    CHECK(worst <= 1e-7);
    CHECK(InUnitRange(g.images));
    CHECK(g.labels == set.labels);
    CHECK(g.Provenance().find("0.299 R + 0.587 G + 0.114 B") != std::string::npos);
  }
  SUBCASE("channel count") {
    CHECK(ErrorOf([] { (void)ToGrayscale(RandomSet(1, 1, 4, 4, 4)); }) ==
          ErrorCode::kInvalidArgument);
    CHECK(ErrorOf([] { (void)ToGrayscale(RandomSet(1, 4, 4, 4, 4)); }) ==
          ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("center crop and bilinear resize") {
  SUBCASE("same size is the identity") {
    const LabeledImageSet set = RandomSet(2, 1, 6, 6, 5);
    const LabeledImageSet out = CenterCropResize(set, 6, 6);
    for (std::size_t k = 0; k < set.images.size(); ++k) {
      CHECK(out.images[k] == doctest::Approx(set.images[k]).epsilon(1e-6));
    }
  }
  SUBCASE("crop takes the centered square") {
    LabeledImageSet set = RandomSet(1, 1, 4, 8, 6);
    const LabeledImageSet out = CenterCropResize(set, 4, 4);
    for (std::size_t y = 0; y < 4; ++y) {
      for (std::size_t x = 0; x < 4; ++x) {
        CHECK(out.images[y * 4 + x] == doctest::Approx(set.images[y * 8 + x + 2]).epsilon(1e-6));
      }
    }
  }
  SUBCASE("2x downsample averages 2x2 blocks") {
    const LabeledImageSet set = RandomSet(1, 2, 8, 8, 7);
    const LabeledImageSet out = CenterCropResize(set, 4, 4);
    REQUIRE(out.images.shape() == Shape{1, 2, 4, 4});
    for (std::size_t c = 0; c < 2; ++c) {
      const float* p = set.images.raw() + c * 64;
      for (std::size_t y = 0; y < 4; ++y) {
        for (std::size_t x = 0; x < 4; ++x) {
          const double mean = (p[2 * y * 8 + 2 * x] + p[2 * y * 8 + 2 * x + 1] +
                               p[(2 * y + 1) * 8 + 2 * x] + p[(2 * y + 1) * 8 + 2 * x + 1]) /
                              4.0;
          CHECK(out.images[c * 16 + y * 4 + x] == doctest::Approx(mean).epsilon(1e-6));
        }
      }
    }
  }
  SUBCASE("constant images and range") {
    LabeledImageSet set = RandomSet(1, 3, 10, 14, 8);
    const LabeledImageSet up = CenterCropResize(set, 32, 32);
    CHECK(InUnitRange(up.images));
    std::fill(set.images.data().begin(), set.images.data().end(), 0.25f);
    const LabeledImageSet flat = CenterCropResize(set, 7, 5);
    for (float v : flat.images.data()) CHECK(v == doctest::Approx(0.25).epsilon(1e-7));
    CHECK(flat.Provenance().find("center_crop(10x10)+bilinear(7x5)") != std::string::npos);
    CHECK(ErrorOf([&] { (void)CenterCropResize(set, 0, 4); }) == ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("regularization image selection") {
  LabeledImageSet set = RandomSet(50, 1, 3, 3, 9);
  // Tag each image with its index so the selection can be traced.
  for (std::size_t i = 0; i < 50; ++i) set.images[i * 9] = static_cast<float>(i) / 49.0f;
  auto traced = [](const LabeledImageSet& s) {
    std::vector<int> out;
    for (std::size_t i = 0; i < s.size(); ++i) {
      out.push_back(static_cast<int>(std::lround(s.images[i * 9] * 49.0f)));
    }
    return out;
  };

  const LabeledImageSet all = SelectRegularizationImages(set, 50, 3);
  std::vector<int> ids = traced(all);
  std::sort(ids.begin(), ids.end());
  for (int i = 0; i < 50; ++i) CHECK(ids[static_cast<std::size_t>(i)] == i);

  const LabeledImageSet a = SelectRegularizationImages(set, 20, 4);
  const LabeledImageSet b = SelectRegularizationImages(set, 20, 4);
  const LabeledImageSet c = SelectRegularizationImages(set, 20, 5);
  CHECK(a.images == b.images);
  CHECK(a.labels == b.labels);
  CHECK(traced(a) != traced(c));
  const std::vector<int> ta = traced(a);
  CHECK(std::set<int>(ta.begin(), ta.end()).size() == 20);
  for (std::size_t i = 0; i < 20; ++i) CHECK(a.labels[i] == ta[i] % 10);

  CHECK(ErrorOf([&] { (void)SelectRegularizationImages(set, 51, 1); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(ErrorOf([&] { (void)SelectRegularizationImages(set, 0, 1); }) ==
        ErrorCode::kInvalidArgument);

  const LabeledImageSet mnist = LoadDataset(testing::MnistTrain());
  const LabeledImageSet reg = SelectRegularizationImages(mnist, 5000, 1);
  CHECK(reg.size() == 5000);
  CHECK(PairCount(reg.size()) == 12497500);
  CHECK(reg.Provenance().find("select(n=5000, seed=1)") != std::string::npos);
}

TEST_CASE("subset and head keep provenance") {
  const LabeledImageSet set = RandomSet(6, 1, 2, 2, 10);
  const LabeledImageSet head = set.Head(2);
  CHECK(head.size() == 2);
  CHECK(head.Provenance() == "synthetic | head(2)");
  CHECK(set.Head(100).size() == 6);
  const std::vector<std::size_t> idx{5, 1};
  CHECK(set.Batch(idx).shape() == Shape{2, 1, 2, 2});
  CHECK(set.BatchLabels(idx) == std::vector<int>{5, 1});
  CHECK(ErrorOf([&] { (void)set.Batch(std::vector<std::size_t>{6}); }) ==
        ErrorCode::kInvalidArgument);
  LabeledImageSet broken = set;
  broken.labels.pop_back();
  CHECK(ErrorOf([&] { broken.Validate(); }) == ErrorCode::kCountMismatch);
  broken = set;
  broken.images[0] = 1.5f;
  CHECK(ErrorOf([&] { broken.Validate(); }) == ErrorCode::kFormat);
}
