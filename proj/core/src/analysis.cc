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


#include "pixreg/analysis.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <nlohmann/json.hpp>
#include <sstream>

#include "pixreg/errors.h"
#include "pixreg/rng.h"

namespace pixreg {
namespace {

double LookupAccuracy(std::span<const AccuracyPoint> curve, double eps, const char* which) {
  for (const AccuracyPoint& p : curve) {
    if (std::abs(p.eps - eps) <= 1e-12) {
      Require(p.accuracy >= 0.0 && p.accuracy <= 1.0, ErrorCode::kInvalidArgument,
              "accuracy outside [0, 1]");
      return p.accuracy;
    }
  }
  std::ostringstream msg;
  msg << which << " curve has no point at eps = " << eps;
  Fail(ErrorCode::kInvalidArgument, msg.str());
}

// Centered DFT of a real (H, W) image.
std::vector<std::complex<double>> CenteredDft(const Tensor& image) {
  Require(image.rank() == 2, ErrorCode::kShapeMismatch,
          "fourier analysis expects an (H, W) image, got " + ShapeToString(image.shape()));
  const std::size_t h = image.dim(0), w = image.dim(1);
  struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
  };
  std::unique_ptr<fftw_complex[], FftwFree> buf(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * h * w)));
  Require(buf != nullptr, ErrorCode::kNumeric, "fftw allocation failed");
  fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), buf.get(), buf.get(),
                                    FFTW_FORWARD, FFTW_ESTIMATE);
  for (std::size_t i = 0; i < h * w; ++i) {
    buf[i][0] = image[i];
    buf[i][1] = 0.0;
  }
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  std::vector<std::complex<double>> out(h * w);
  for (std::size_t u = 0; u < h; ++u) {
    for (std::size_t v = 0; v < w; ++v) {
      const std::size_t cu = (u + h / 2) % h, cv = (v + w / 2) % w;
      out[cu * w + cv] = {buf[u * w + v][0], buf[u * w + v][1]};
    }
  }
  return out;
}

Tensor MapSpectrum(const Tensor& image, double (*fn)(std::complex<double>)) {
  const auto spectrum = CenteredDft(image);
  Tensor out(image.shape());
  for (std::size_t i = 0; i < spectrum.size(); ++i) out[i] = static_cast<float>(fn(spectrum[i]));
  return out;
}

float Clip01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

}  // namespace

TradeoffPoint Tradeoff(std::span<const AccuracyPoint> reg, std::span<const AccuracyPoint> unreg,
                       double eps_high, double a0, double alpha, double th) {
  TradeoffPoint p;
  p.alpha = alpha;
  p.th = th;
  p.r0 = LookupAccuracy(reg, 0.0, "regularized");
  p.rd = LookupAccuracy(reg, eps_high, "regularized");
  p.u0 = LookupAccuracy(unreg, 0.0, "unregularized");
  p.ud = LookupAccuracy(unreg, eps_high, "unregularized");
  if (p.u0 > 0.0) p.r0_u0 = p.r0 / p.u0;
  if (p.ud > 0.0) p.rd_ud = p.rd / p.ud;
  p.accuracy_ok = p.r0_u0 && *p.r0_u0 >= a0;
  p.robustness_gain = p.rd_ud && *p.rd_ud > 1.0;
  p.acceptable = p.accuracy_ok && p.robustness_gain;
  return p;
}

std::string TradeoffJson(std::span<const TradeoffPoint> points) {
  nlohmann::json arr = nlohmann::json::array();
  for (const TradeoffPoint& p : points) {
    nlohmann::json j = {{"alpha", p.alpha}, {"th", p.th}, {"r0", p.r0},   {"rd", p.rd},
                        {"u0", p.u0},       {"ud", p.ud}, {"accuracy_ok", p.accuracy_ok},
                        {"robustness_gain", p.robustness_gain}, {"acceptable", p.acceptable}};
    j["r0_u0"] = p.r0_u0 ? nlohmann::json(*p.r0_u0) : nlohmann::json(nullptr);
    j["rd_ud"] = p.rd_ud ? nlohmann::json(*p.rd_ud) : nlohmann::json(nullptr);
    arr.push_back(j);
  }
  return arr.dump(2);
}

Tensor FourierPower(const Tensor& image) {
  return MapSpectrum(image, [](std::complex<double> z) { return std::norm(z); });
}

Tensor FourierMagnitude(const Tensor& image) {
  return MapSpectrum(image, [](std::complex<double> z) { return std::abs(z); });
}

RadialProfile RadialSpectrum(const Tensor& spectrum) {
  Require(spectrum.rank() == 2, ErrorCode::kShapeMismatch,
          "radial spectrum expects an (H, W) spectrum, got " + ShapeToString(spectrum.shape()));
  const std::size_t h = spectrum.dim(0), w = spectrum.dim(1);
  const std::size_t bins = std::min(h, w) / 2 + 1;
  RadialProfile out;
  std::vector<double> sum(bins, 0.0);
  out.count.assign(bins, 0);
  double corner_sum = 0.0;
  const double ch = static_cast<double>(h / 2), cw = static_cast<double>(w / 2);
  for (std::size_t u = 0; u < h; ++u) {
    for (std::size_t v = 0; v < w; ++v) {
      const double du = static_cast<double>(u) - ch, dv = static_cast<double>(v) - cw;
      const auto r = static_cast<std::size_t>(std::floor(std::sqrt(du * du + dv * dv)));
      const double value = spectrum[u * w + v];
      if (r < bins) {
        sum[r] += value;
        ++out.count[r];
      } else {
        corner_sum += value;
        ++out.corner_count;
      }
    }
  }
  out.mean.resize(bins);
  for (std::size_t r = 0; r < bins; ++r) {
    out.mean[r] = out.count[r] ? sum[r] / static_cast<double>(out.count[r]) : 0.0;
  }
  if (out.corner_count) out.corner_mean = corner_sum / static_cast<double>(out.corner_count);
  return out;
}

std::string_view CorruptionName(Corruption c) {
  switch (c) {
    case Corruption::kGaussianNoise: return "gaussian_noise";
    case Corruption::kShotNoise: return "shot_noise";
    case Corruption::kImpulseNoise: return "impulse_noise";
    case Corruption::kBrightness: return "brightness";
    case Corruption::kContrast: return "contrast";
    case Corruption::kBoxBlur: return "box_blur";
  }
  return "?";
}

Corruption ParseCorruption(std::string_view name) {
  for (auto c : {Corruption::kGaussianNoise, Corruption::kShotNoise, Corruption::kImpulseNoise,
                 Corruption::kBrightness, Corruption::kContrast, Corruption::kBoxBlur}) {
    if (CorruptionName(c) == name) return c;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown corruption '" + std::string(name) + "'");
}

ImageTransform MakeCorruption(Corruption c, double severity, std::size_t height, std::size_t width) {
  Require(std::isfinite(severity), ErrorCode::kInvalidArgument, "corruption severity must be finite");
  switch (c) {
    case Corruption::kGaussianNoise:
      return NoiseTransform(NoiseFamily::kGaussian, severity);
    case Corruption::kImpulseNoise:
      return NoiseTransform(NoiseFamily::kSaltPepper, severity);
    case Corruption::kShotNoise:
      Require(severity > 0.0, ErrorCode::kInvalidArgument, "shot noise needs a positive photon rate");
      return [severity](std::span<float> image, std::mt19937_64& rng) {
        for (float& v : image) {
          std::poisson_distribution<long> photons(std::max(0.0, static_cast<double>(v)) * severity);
          v = Clip01(static_cast<double>(photons(rng)) / severity);
        }
      };
    case Corruption::kBrightness:
      return [severity](std::span<float> image, std::mt19937_64&) {
        for (float& v : image) v = Clip01(v + severity);
      };
    case Corruption::kContrast:
      Require(severity >= 0.0, ErrorCode::kInvalidArgument, "contrast factor must be >= 0");
      return [severity](std::span<float> image, std::mt19937_64&) {
        double mean = 0.0;
        for (float v : image) mean += v;
        mean /= static_cast<double>(image.size());
        for (float& v : image) v = Clip01(mean + severity * (v - mean));
      };
    case Corruption::kBoxBlur: {
      const auto k = static_cast<long>(severity);
      Require(k >= 1 && k % 2 == 1 && static_cast<double>(k) == severity, ErrorCode::kInvalidArgument,
              "box blur needs an odd integer kernel side");
      Require(height > 0 && width > 0, ErrorCode::kInvalidArgument, "box blur needs image geometry");
      return [k, height, width](std::span<float> image, std::mt19937_64&) {
        const std::size_t plane = height * width;
        Require(image.size() % plane == 0, ErrorCode::kShapeMismatch, "box blur: geometry mismatch");
        const long r = k / 2, h = static_cast<long>(height), w = static_cast<long>(width);
        std::vector<float> src(image.begin(), image.end());
        for (std::size_t base = 0; base < image.size(); base += plane) {
          for (long y = 0; y < h; ++y) {
            for (long x = 0; x < w; ++x) {
              double s = 0.0;
              for (long dy = -r; dy <= r; ++dy) {
                for (long dx = -r; dx <= r; ++dx) {
                  const long yy = std::clamp(y + dy, 0L, h - 1), xx = std::clamp(x + dx, 0L, w - 1);
                  s += src[base + static_cast<std::size_t>(yy * w + xx)];
                }
              }
              image[base + static_cast<std::size_t>(y * w + x)] = static_cast<float>(s / (k * k));
            }
          }
        }
      };
    }
  }
  Fail(ErrorCode::kInvalidArgument, "unknown corruption");
}

CorruptionSpectrumResult CorruptionSpectrum(const LabeledImageSet& clean,
                                            const ImageTransform& corrupt, std::uint64_t seed) {
  Require(clean.size() > 0, ErrorCode::kInvalidArgument, "corruption spectrum needs images");
  const std::size_t c = clean.channels(), h = clean.height(), w = clean.width();
  std::vector<double> acc(h * w, 0.0);
  const std::uint64_t base = DeriveSeed(seed, streams::kEval);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const auto original = clean.images.Row(i);
    std::vector<float> corrupted(original.begin(), original.end());
    std::mt19937_64 rng(DeriveSeed(base, i));
    if (corrupt) corrupt(corrupted, rng);
    for (std::size_t ch = 0; ch < c; ++ch) {
      Tensor residual({h, w});
      for (std::size_t k = 0; k < h * w; ++k) {
        residual[k] = corrupted[ch * h * w + k] - original[ch * h * w + k];
      }
      const Tensor mag = FourierMagnitude(residual);
      for (std::size_t k = 0; k < h * w; ++k) acc[k] += mag[k];
    }
  }
  CorruptionSpectrumResult out{Tensor({h, w}), Tensor({h, w})};
  const double denom = static_cast<double>(clean.size() * c);
  for (std::size_t k = 0; k < h * w; ++k) {
    const double m = acc[k] / denom;
    out.mean_magnitude[k] = static_cast<float>(m);
    out.log_view[k] = static_cast<float>(std::log1p(m));
  }
  return out;
}

RadialProfile CorruptionPowerProfile(const CorruptionSpectrumResult& spectrum) {
  Tensor power = spectrum.mean_magnitude;
  for (float& v : power.data()) v *= v;
  return RadialSpectrum(power);
}

std::string_view FrequencyBandName(FrequencyBand band) {
  switch (band) {
    case FrequencyBand::kLow: return "low";
    case FrequencyBand::kMedium: return "medium";
    case FrequencyBand::kHigh: return "high";
  }
  return "?";
}

double MeanRadius(const RadialProfile& profile) {
  Require(profile.mean.size() >= 2, ErrorCode::kInvalidArgument, "profile needs at least two bins");
  double total = 0.0, moment = 0.0;
  for (std::size_t r = 0; r < profile.mean.size(); ++r) {
    const double mass = profile.mean[r] * static_cast<double>(profile.count[r]);
    Require(mass >= 0.0, ErrorCode::kInvalidArgument, "spectrum values must be non-negative");
    total += mass;
    moment += static_cast<double>(r) * mass;
  }
  Require(total > 0.0, ErrorCode::kInvalidArgument, "zero-energy spectrum has no dominant frequency");
  return moment / total / static_cast<double>(profile.mean.size() - 1);
}

FrequencyBand FrequencyCategory(const RadialProfile& profile) {
  const double r = MeanRadius(profile);
  if (r < kBandLow) return FrequencyBand::kLow;
  if (r > kBandHigh) return FrequencyBand::kHigh;
  return FrequencyBand::kMedium;
}

double SimCorrelation(const Tensor& a, const Tensor& b) {
  Require(a.rank() == 2 && a.dim(0) == a.dim(1) && a.shape() == b.shape(),
          ErrorCode::kShapeMismatch, "correlation needs two square matrices of one shape");
  const std::size_t n = a.dim(0);
  Require(n >= 2, ErrorCode::kInvalidArgument, "correlation needs off-diagonal entries");
  double ma = 0.0, mb = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      ma += a[i * n + j];
      mb += b[i * n + j];
      ++count;
    }
  }
  ma /= static_cast<double>(count);
  mb /= static_cast<double>(count);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double da = a[i * n + j] - ma, db = b[i * n + j] - mb;
      sab += da * db;
      saa += da * da;
      sbb += db * db;
    }
  }
  Require(saa > 0.0 && sbb > 0.0, ErrorCode::kInvalidArgument,
          "correlation undefined: an input has zero variance off the diagonal");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::string ProfileCsv(const RadialProfile& profile) {
  std::ostringstream out;
  out.precision(17);
  out << "radius,count,mean\n";
  for (std::size_t r = 0; r < profile.mean.size(); ++r) {
    out << r << "," << profile.count[r] << "," << profile.mean[r] << "\n";
  }
  out << "corner," << profile.corner_count << "," << profile.corner_mean << "\n";
  return out.str();
}

std::string SpectrumCsv(const Tensor& spectrum) {
  Require(spectrum.rank() == 2, ErrorCode::kShapeMismatch, "spectrum must be (H, W)");
  std::ostringstream out;
  out.precision(9);
  const std::size_t h = spectrum.dim(0), w = spectrum.dim(1);
  for (std::size_t u = 0; u < h; ++u) {
    for (std::size_t v = 0; v < w; ++v) out << (v ? "," : "") << spectrum[u * w + v];
    out << "\n";
  }
  return out.str();
}

}  // namespace pixreg
