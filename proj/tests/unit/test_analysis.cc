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
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.h"
#include "pixreg/analysis.h"
#include "support.h"

using namespace pixreg;
using testing::ErrorOf;

namespace {

std::vector<AccuracyPoint> Curve(double a0, double ad, double eps_high = 0.1) {
  return {{0.0, a0}, {0.05, (a0 + ad) / 2}, {eps_high, ad}};
}

double Total(const Tensor& t) {
  double s = 0.0;
  for (float v : t.data()) s += v;
  return s;
}

Tensor Circshift(const Tensor& x, std::size_t dy, std::size_t dx) {
  const std::size_t h = x.dim(0), w = x.dim(1);
  Tensor out({h, w});
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) out.at({(i + dy) % h, (j + dx) % w}) = x.at({i, j});
  }
  return out;
}

// Images whose amplitude spectrum falls off as 1/f, rescaled into [0.25, 0.75].
LabeledImageSet PinkFields(std::size_t n, std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  LabeledImageSet set;
  set.images = Tensor({n, 1, size, size});
  const long half = static_cast<long>(size / 2);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> img(size * size, 0.0);
    for (long u = -half + 1; u < half; ++u) {
      for (long v = 0; v < half; ++v) {
        if (v == 0 && u <= 0) continue;
        const double f = std::hypot(static_cast<double>(u), static_cast<double>(v));
        const double p = phase(rng);
        for (std::size_t i = 0; i < size; ++i) {
          for (std::size_t j = 0; j < size; ++j) {
            const double arg = 2.0 * std::numbers::pi *
                               (static_cast<double>(u) * static_cast<double>(i) +
                                static_cast<double>(v) * static_cast<double>(j)) /
                               static_cast<double>(size);
            img[i * size + j] += std::cos(arg + p) / f;
          }
        }
      }
    }
    const auto [lo, hi] = std::minmax_element(img.begin(), img.end());
    for (std::size_t p = 0; p < img.size(); ++p) {
      set.images[k * size * size + p] = static_cast<float>(0.25 + 0.5 * (img[p] - *lo) / (*hi - *lo));
    }
    set.labels.push_back(0);
  }
  set.num_classes = 1;
  set.source = "synthetic 1/f fields";
  return set;
}

const LabeledImageSet& Fields() {
  static const LabeledImageSet set = PinkFields(24, 32, 17);
  return set;
}

double AnchorRadius(const LabeledImageSet& set, Corruption c, double severity) {
  const ImageTransform fn = MakeCorruption(c, severity, set.height(), set.width());
  return MeanRadius(CorruptionPowerProfile(CorruptionSpectrum(set, fn, 3)));
}

}  // namespace

TEST_CASE("tradeoff examples") {
  const auto same = Curve(0.9, 0.3);
  const TradeoffPoint eq = Tradeoff(same, same, 0.1);
  CHECK(*eq.r0_u0 == 1.0);
  CHECK(*eq.rd_ud == 1.0);
  CHECK(eq.accuracy_ok);
  CHECK_FALSE(eq.robustness_gain);
  CHECK_FALSE(eq.acceptable);

  const TradeoffPoint lossy = Tradeoff(Curve(0.85, 0.9), Curve(1.0, 0.1), 0.1, 0.9);
  CHECK_FALSE(lossy.accuracy_ok);
  CHECK(lossy.robustness_gain);
  CHECK_FALSE(lossy.acceptable);

  const TradeoffPoint good = Tradeoff(Curve(0.95, 0.4), Curve(1.0, 0.2), 0.1, 0.9, 4.0, 0.2);
  CHECK(*good.r0_u0 == doctest::Approx(0.95));
  CHECK(*good.rd_ud == doctest::Approx(2.0));
  CHECK(good.acceptable);
  CHECK(good.alpha == 4.0);
  CHECK(good.th == 0.2);

  const TradeoffPoint zero = Tradeoff(Curve(0.95, 0.4), Curve(1.0, 0.0), 0.1);
  CHECK_FALSE(zero.rd_ud.has_value());
  CHECK_FALSE(zero.acceptable);
  CHECK(TradeoffJson(std::vector<TradeoffPoint>{zero}).find("null") != std::string::npos);

  CHECK(ErrorOf([&] { (void)Tradeoff(same, same, 0.2); }) == ErrorCode::kInvalidArgument);
  CHECK(kDefaultA0 == 0.9);
  CHECK(kEpsHighRandom == 0.1);
  CHECK(kEpsHighFgsm == 0.02);
}

TEST_CASE("tradeoff acceptability is monotone in RD") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double r0 = u(rng), u0 = u(rng), ud = u(rng);
    double rd = u(rng);
    bool was = Tradeoff(Curve(r0, rd), Curve(u0, ud), 0.1).acceptable;
    for (int k = 0; k < 5; ++k) {
      rd = std::min(1.0, rd + 0.1 * u(rng));
      const bool now = Tradeoff(Curve(r0, rd), Curve(u0, ud), 0.1).acceptable;
      CHECK((!was || now));
      was = now;
    }
  }
}

TEST_CASE("fourier power of a constant image sits at the center") {
  const std::size_t h = 6, w = 8;
  const Tensor p = FourierPower(Tensor({h, w}, 0.3f));
  const double want = static_cast<double>(h * h * w * w) * 0.09;
  CHECK(p.at({h / 2, w / 2}) == doctest::Approx(want).epsilon(1e-6));
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      if (i != h / 2 || j != w / 2) CHECK(std::abs(p.at({i, j})) < 1e-6 * want);
    }
  }
}

TEST_CASE("a cosine along one axis gives two symmetric peaks") {
  const std::size_t h = 16, w = 16, f = 3;
  Tensor x({h, w});
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      x.at({i, j}) = static_cast<float>(std::cos(2.0 * std::numbers::pi * f * j / w));
    }
  }
  const Tensor p = FourierPower(x);
  const double peak = std::pow(h * w / 2.0, 2);
  CHECK(p.at({h / 2, w / 2 + f}) == doctest::Approx(peak).epsilon(1e-5));
  CHECK(p.at({h / 2, w / 2 - f}) == doctest::Approx(peak).epsilon(1e-5));
  CHECK(Total(p) == doctest::Approx(2 * peak).epsilon(1e-5));
}

TEST_CASE("fourier power matches the direct DFT and Parseval") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t h = 3 + rng() % 14, w = 3 + rng() % 14;
    const Tensor x = testing::RandomTensor({h, w}, rng);
    const Tensor p = FourierPower(x);
    const Tensor m = FourierMagnitude(x);
    const auto dft = oracle::Dft2d(testing::ToDouble(x), h, w);
    double energy = 0.0, sum_p = 0.0, peak = 0.0;
    for (float v : x.data()) energy += static_cast<double>(v) * v;
    for (const auto& z : dft) peak = std::max(peak, std::norm(z));
    for (std::size_t u = 0; u < h; ++u) {
      for (std::size_t v = 0; v < w; ++v) {
        const double want = std::norm(dft[u * w + v]);
        const std::size_t cu = (u + h / 2) % h, cv = (v + w / 2) % w;
        CHECK(std::abs(p.at({cu, cv}) - want) <= 1e-5 * peak);
        CHECK(std::abs(m.at({cu, cv}) - std::sqrt(want)) <= 1e-5 * std::sqrt(peak));
        sum_p += p.at({cu, cv});
      }
    }
    CHECK(std::abs(sum_p - static_cast<double>(h * w) * energy) <=
          1e-4 * static_cast<double>(h * w) * energy);
  }
}

TEST_CASE("power spectra are invariant to circular shifts") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t h = 4 + rng() % 29, w = 4 + rng() % 29;
    const Tensor x = testing::RandomTensor({h, w}, rng);
    const Tensor p = FourierPower(x);
    const Tensor q = FourierPower(Circshift(x, rng() % h, rng() % w));
    double peak = 0.0;
    for (float v : p.data()) peak = std::max(peak, static_cast<double>(v));
    for (std::size_t k = 0; k < p.size(); ++k) {
      CHECK(std::abs(p[k] - q[k]) <= 1e-6 * std::max(static_cast<double>(p[k]), 1e-6 * peak));
    }
  }
}

TEST_CASE("radial profile examples") {
  const Tensor flat = FourierPower(Tensor({16, 16}, 0.5f));
  const RadialProfile c = RadialSpectrum(flat);
  REQUIRE(c.mean.size() == 9);
  CHECK(c.mean[0] > 0.0);
  for (std::size_t r = 1; r < c.mean.size(); ++r) CHECK(std::abs(c.mean[r]) < 1e-6 * c.mean[0]);

  Tensor ring({32, 32});
  for (std::size_t i = 0; i < 32; ++i) {
    for (std::size_t j = 0; j < 32; ++j) {
      const double d = std::hypot(static_cast<double>(i) - 16.0, static_cast<double>(j) - 16.0);
      if (static_cast<int>(std::floor(d)) == 5) ring.at({i, j}) = 1.0f;
    }
  }
  const RadialProfile rp = RadialSpectrum(ring);
  CHECK(std::max_element(rp.mean.begin(), rp.mean.end()) - rp.mean.begin() == 5);
  CHECK(rp.mean[5] == 1.0);

  const RadialProfile odd = RadialSpectrum(Tensor({7, 10}, 1.0f));
  CHECK(odd.mean.size() == 4);
}

TEST_CASE("radial bins partition the power") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t h = 4 + rng() % 29, w = 4 + rng() % 29;
    const Tensor p = FourierPower(testing::RandomTensor({h, w}, rng));
    const RadialProfile rp = RadialSpectrum(p);
    double sum = rp.corner_mean * static_cast<double>(rp.corner_count);
    std::uint64_t count = rp.corner_count;
    for (std::size_t r = 0; r < rp.mean.size(); ++r) {
      sum += rp.mean[r] * static_cast<double>(rp.count[r]);
      count += rp.count[r];
    }
    CHECK(count == h * w);
    const double total = Total(p);
    CHECK(std::abs(sum - total) <= 1e-6 * total);
  }
}

TEST_CASE("white noise has a flat radial profile") {
  std::mt19937_64 rng(5);
  std::normal_distribution<float> n;
  std::vector<double> acc(17, 0.0);
  for (int trial = 0; trial < 1000; ++trial) {
    Tensor x({32, 32});
    for (float& v : x.data()) v = n(rng);
    const RadialProfile rp = RadialSpectrum(FourierPower(x));
    for (std::size_t r = 0; r < acc.size(); ++r) acc[r] += rp.mean[r];
  }
  const auto [lo, hi] = std::minmax_element(acc.begin() + 1, acc.end());
  CHECK(*hi / *lo < 1.5);
}

TEST_CASE("corruption spectrum examples") {
  const LabeledImageSet& set = Fields();
  const CorruptionSpectrumResult none =
      CorruptionSpectrum(set, [](std::span<float>, std::mt19937_64&) {}, 1);
  for (float v : none.mean_magnitude.data()) CHECK(v == 0.0f);
  CHECK(ErrorOf([&] { (void)MeanRadius(CorruptionPowerProfile(none)); }) ==
        ErrorCode::kInvalidArgument);

  const CorruptionSpectrumResult bright =
      CorruptionSpectrum(set, MakeCorruption(Corruption::kBrightness, 0.2, 32, 32), 1);
  const Tensor& bm = bright.mean_magnitude;
  CHECK(bm.at({16, 16}) == doctest::Approx(0.2 * 32 * 32).epsilon(1e-4));
  CHECK(Total(bm) == doctest::Approx(bm.at({16, 16})).epsilon(1e-4));
  for (std::size_t k = 0; k < bm.size(); ++k) {
    CHECK(bright.log_view[k] == doctest::Approx(std::log1p(bm[k])).epsilon(1e-6));
  }

  const CorruptionSpectrumResult noise =
      CorruptionSpectrum(set, MakeCorruption(Corruption::kGaussianNoise, 0.1, 32, 32), 1);
  const RadialProfile rp = RadialSpectrum(noise.mean_magnitude);
  const auto [lo, hi] = std::minmax_element(rp.mean.begin() + 1, rp.mean.end());
  CHECK(*hi / *lo < 1.5);

  const CorruptionSpectrumResult again =
      CorruptionSpectrum(set, MakeCorruption(Corruption::kGaussianNoise, 0.1, 32, 32), 1);
  CHECK(again.mean_magnitude == noise.mean_magnitude);
}

TEST_CASE("corruptions stay in range and honor their severities") {
  std::mt19937_64 rng(6);
  const Tensor x = testing::RandomTensor({8, 8}, rng, 0.0, 1.0);
  for (Corruption c : {Corruption::kGaussianNoise, Corruption::kShotNoise,
                       Corruption::kImpulseNoise, Corruption::kBrightness, Corruption::kContrast,
                       Corruption::kBoxBlur}) {
    CHECK(ParseCorruption(CorruptionName(c)) == c);
    const double severity = c == Corruption::kBoxBlur ? 3.0 : c == Corruption::kShotNoise ? 60.0 : 0.3;
    Tensor y = x;
    std::mt19937_64 g(1);
    MakeCorruption(c, severity, 8, 8)(y.data(), g);
    for (float v : y.data()) CHECK((v >= 0.0f && v <= 1.0f));
  }
  // A 3 x 3 box blur of a constant image is the identity.
  Tensor flat({8, 8}, 0.4f);
  std::mt19937_64 g(1);
  MakeCorruption(Corruption::kBoxBlur, 3.0, 8, 8)(flat.data(), g);
  for (float v : flat.data()) CHECK(v == doctest::Approx(0.4f).epsilon(1e-6));
  CHECK(ErrorOf([] { (void)ParseCorruption("fog"); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("frequency category thresholds") {
  RadialProfile p;
  p.mean = {1.0, 0.0, 0.0, 0.0, 0.0};
  p.count = {1, 4, 8, 12, 16};
  CHECK(MeanRadius(p) == 0.0);
  CHECK(FrequencyCategory(p) == FrequencyBand::kLow);
  p.mean = {0.0, 0.0, 1.0, 0.0, 0.0};
  CHECK(MeanRadius(p) == 0.5);
  CHECK(FrequencyCategory(p) == FrequencyBand::kMedium);
  p.mean = {0.0, 0.0, 0.0, 0.0, 1.0};
  CHECK(FrequencyCategory(p) == FrequencyBand::kHigh);
  p.mean = {0.0, 0.0, 0.0, 0.0, 0.0};
  CHECK(ErrorOf([&] { (void)FrequencyCategory(p); }) == ErrorCode::kInvalidArgument);
  CHECK(FrequencyBandName(FrequencyBand::kMedium) == "medium");
}

TEST_CASE("frequency anchors: brightness is low, gaussian noise is high") {
  const double bright = AnchorRadius(Fields(), Corruption::kBrightness, 0.2);
  const double noise = AnchorRadius(Fields(), Corruption::kGaussianNoise, 0.1);
  MESSAGE("mean radius brightness " << bright << ", gaussian noise " << noise);
  CHECK(bright < kBandLow);
  CHECK(noise > kBandHigh);
  const LabeledImageSet mnist = LoadDataset(testing::MnistTest()).Head(200);
  CHECK(AnchorRadius(mnist, Corruption::kBrightness, 0.2) < kBandLow);
}

// Kept in its own ctest entry (see tests/CMakeLists.txt).
TEST_CASE("frequency anchor: 3x3 box blur residual is medium") {
  const double blur = AnchorRadius(Fields(), Corruption::kBoxBlur, 3.0);
  const LabeledImageSet mnist = LoadDataset(testing::MnistTest()).Head(200);
  const double blur_mnist = AnchorRadius(mnist, Corruption::kBoxBlur, 3.0);
  MESSAGE("mean radius of the 3x3 box blur residual: fields " << blur << ", MNIST " << blur_mnist);
  CHECK(blur >= kBandLow);
  CHECK(blur <= kBandHigh);
  CHECK(blur_mnist >= kBandLow);
  CHECK(blur_mnist <= kBandHigh);
}

TEST_CASE("sim correlation examples and oracle") {
  std::mt19937_64 rng(7);
  auto symmetric = [&](std::size_t n) {
    Tensor m = testing::RandomTensor({n, n}, rng);
    for (std::size_t i = 0; i < n; ++i) {
      m.at({i, i}) = 1.0f;
      for (std::size_t j = 0; j < i; ++j) m.at({j, i}) = m.at({i, j});
    }
    return m;
  };
  const Tensor a = symmetric(10);
  CHECK(SimCorrelation(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  Tensor neg = a;
  for (float& v : neg.data()) v = -v;
  CHECK(SimCorrelation(a, neg) == doctest::Approx(-1.0).epsilon(1e-12));

  for (int trial = 0; trial < 100; ++trial) {
    const Tensor x = symmetric(50), y = symmetric(50);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < 50; ++i) {
      for (std::size_t j = 0; j < 50; ++j) {
        if (i == j) continue;
        xs.push_back(x.at({i, j}));
        ys.push_back(y.at({i, j}));
      }
    }
    CHECK(std::abs(SimCorrelation(x, y) - oracle::Pearson(xs, ys)) < 1e-9);
  }
  Tensor constant({4, 4}, 0.3f);
  CHECK(ErrorOf([&] { (void)SimCorrelation(constant, symmetric(4)); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(ErrorOf([&] { (void)SimCorrelation(symmetric(4), symmetric(5)); }) ==
        ErrorCode::kShapeMismatch);
}

TEST_CASE("csv output") {
  RadialProfile p;
  p.mean = {2.0, 0.5};
  p.count = {1, 8};
  p.corner_mean = 0.25;
  p.corner_count = 4;
  const std::string csv = ProfileCsv(p);
  CHECK(csv.rfind("radius,count,mean\n", 0) == 0);
  CHECK(csv.find("\n1,8,0.5\n") != std::string::npos);
  CHECK(csv.find("corner,4,0.25") != std::string::npos);
  const std::string s = SpectrumCsv(Tensor({2, 2}, {1.0f, 2.0f, 3.0f, 4.0f}));
  CHECK(s == "1,2\n3,4\n");
}
