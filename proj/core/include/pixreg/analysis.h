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


#ifndef PIXREG_ANALYSIS_H_
#define PIXREG_ANALYSIS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pixreg/attacks.h"
#include "pixreg/datasets.h"
#include "pixreg/tensor.h"
#include "pixreg/trainer.h"

namespace pixreg {

inline constexpr double kDefaultA0 = 0.9;
inline constexpr double kEpsHighRandom = 0.1;
inline constexpr double kEpsHighFgsm = 0.02;

// Clean (eps = 0) and high-distortion accuracies of a regularized model (R)
// against its unregularized counterpart (U).
struct TradeoffPoint {
  double alpha = 0.0;
  double th = 0.0;
  double r0 = 0.0, rd = 0.0, u0 = 0.0, ud = 0.0;
  std::optional<double> r0_u0;  // empty when u0 == 0
  std::optional<double> rd_ud;  // empty when ud == 0
  bool accuracy_ok = false;      // r0/u0 >= a0
  bool robustness_gain = false;  // rd/ud > 1
  bool acceptable = false;       // both of the above
};

TradeoffPoint Tradeoff(std::span<const AccuracyPoint> reg, std::span<const AccuracyPoint> unreg,
                       double eps_high, double a0 = kDefaultA0, double alpha = 0.0, double th = 0.0);
std::string TradeoffJson(std::span<const TradeoffPoint> points);

// |DFT(x)|^2 of an (H, W) image with the forward transform unnormalized
// (inverse carries 1/(HW)), zero frequency moved to (H/2, W/2).
Tensor FourierPower(const Tensor& image);
// Same layout, magnitude |DFT(x)|.
Tensor FourierMagnitude(const Tensor& image);

// Bin r holds the mean over pixels whose distance from the center bin floors
// to r, for r = 0 .. floor(min(H, W)/2). Pixels farther out (the corners) are
// pooled into `corner` so that bins and corner together partition the input.
struct RadialProfile {
  std::vector<double> mean;
  std::vector<std::uint64_t> count;
  double corner_mean = 0.0;
  std::uint64_t corner_count = 0;
};
RadialProfile RadialSpectrum(const Tensor& centered_spectrum);

// Synthetic corruptions used for the spectrum analyses.
enum class Corruption { kGaussianNoise, kShotNoise, kImpulseNoise, kBrightness, kContrast, kBoxBlur };
std::string_view CorruptionName(Corruption c);
Corruption ParseCorruption(std::string_view name);
// `severity`: noise std (gaussian), photons per unit intensity (shot),
// replacement probability (impulse), additive shift (brightness), contrast
// factor (contrast), kernel side (box blur, odd).
ImageTransform MakeCorruption(Corruption c, double severity, std::size_t height, std::size_t width);

// Mean over images (and channels) of |DFT(C(x) - x)|, centered, plus the
// log(1 + v) view.
struct CorruptionSpectrumResult {
  Tensor mean_magnitude;
  Tensor log_view;
};
CorruptionSpectrumResult CorruptionSpectrum(const LabeledImageSet& clean, const ImageTransform& corrupt,
                                            std::uint64_t seed);
// Radial profile of the squared mean magnitude, the input FrequencyCategory
// expects for a corruption.
RadialProfile CorruptionPowerProfile(const CorruptionSpectrumResult& spectrum);

enum class FrequencyBand { kLow, kMedium, kHigh };
std::string_view FrequencyBandName(FrequencyBand band);
inline constexpr double kBandLow = 0.2;
inline constexpr double kBandHigh = 0.5;

// Mean bin radius weighted by the total power in each ring (bin mean times
// bin count), divided by the largest bin radius. Corner pixels are ignored.
double MeanRadius(const RadialProfile& profile);
FrequencyBand FrequencyCategory(const RadialProfile& profile);

// Pearson correlation over the off-diagonal entries of two square matrices.
double SimCorrelation(const Tensor& a, const Tensor& b);

std::string ProfileCsv(const RadialProfile& profile);
std::string SpectrumCsv(const Tensor& spectrum);

}  // namespace pixreg

#endif  // PIXREG_ANALYSIS_H_
