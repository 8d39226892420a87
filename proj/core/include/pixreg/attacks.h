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


#ifndef PIXREG_ATTACKS_H_
#define PIXREG_ATTACKS_H_

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pixreg/datasets.h"
#include "pixreg/tapnet.h"
#include "pixreg/trainer.h"

namespace pixreg {

// Noise families, all clipped to [0, 1] afterwards:
//   gaussian     x + eps * z, z ~ N(0, 1) per pixel
//   uniform      x + u, u ~ U(-eps, eps) per pixel
//   salt_pepper  each pixel replaced by 0 or 1 (equiprobable) with
//                probability min(eps * c, 1)
enum class NoiseFamily { kGaussian, kUniform, kSaltPepper };

std::string_view NoiseFamilyName(NoiseFamily family);
NoiseFamily ParseNoiseFamily(std::string_view name);

struct NoiseSpec {
  NoiseFamily family = NoiseFamily::kGaussian;
  double eps = 0.0;
  std::uint64_t seed = 0;
  double c = 1.0;  // salt_pepper rate multiplier
};

void ApplyNoise(std::span<float> image, NoiseFamily family, double eps, double c,
                std::mt19937_64& rng);
// Whole tensor under spec.seed.
Tensor ApplyNoise(const Tensor& x, const NoiseSpec& spec);
ImageTransform NoiseTransform(NoiseFamily family, double eps, double c = 1.0);

// x + eps * sign(d CE / dx), clipped to [0, 1]; sign(0) = 0. x: (B, C, H, W).
Tensor Fgsm(const TapNet& net, const Tensor& x, std::span<const int> labels, double eps);

struct AccuracyPoint {
  double eps = 0.0;
  double accuracy = 0.0;
};

struct BoundaryOptions {
  std::uint64_t steps = 50;
  std::uint64_t init_draws = 50;
  std::uint64_t bisection_steps = 10;
  double delta = 0.01;    // orthogonal step, relative to the current distance
  double epsilon = 0.01;  // inward step, fraction of the current distance
  std::uint64_t window = 10;
  double adapt_factor = 1.5;
};

struct AttackReport {
  std::string attack;
  std::vector<std::uint64_t> seeds;
  std::vector<AccuracyPoint> curve;

  // boundary attack
  BoundaryOptions boundary;
  std::uint64_t images = 0;
  std::uint64_t repeats = 0;
  std::vector<std::vector<double>> per_image;  // [repeat][image]: |eta|^2 / d, failures excluded
  std::vector<double> repeat_scores;
  double score = 0.0;
  std::uint64_t failures = 0;

  std::string ToJson() const;
};

AttackReport NoiseAttack(const TapNet& net, const LabeledImageSet& set, NoiseFamily family,
                         std::span<const double> eps_grid, std::uint64_t seed, double c = 1.0);
// FGSM examples crafted on `substitute` and scored on `target`.
AttackReport TransferAttack(const TapNet& substitute, const TapNet& target,
                            const LabeledImageSet& set, std::span<const double> eps_grid);

using DecisionFn = std::function<int(std::span<const float> image)>;
// Called for every accepted adversarial state (including the initial one).
using AcceptObserver = std::function<void(std::span<const float> adversarial, double distance)>;

struct BoundaryResult {
  bool success = false;
  std::vector<float> adversarial;
  double distance = 0.0;              // L2 to the original
  std::vector<double> trajectory;     // distance after initialization and each step
  std::uint64_t queries = 0;
};

// Decision-based attack. An original that is already misclassified returns
// distance 0 without queries beyond the first. Failure means no adversarial
// starting point among the initial uniform draws.
BoundaryResult BoundaryAttack(const DecisionFn& decide, std::span<const float> x, int label,
                              const BoundaryOptions& options, std::uint64_t seed,
                              const AcceptObserver& on_accept = {});

// Median over images of |eta|^2 / d.
double BoundaryScore(std::span<const std::vector<float>> perturbations);
double MedianOf(std::vector<double> values);

DecisionFn NetDecision(const TapNet& net, const Shape& image_shape);

// Attacks the first `images` images `repeats` times; each repeat's score is
// the median, and the report score is the mean over repeats.
AttackReport BoundaryAttackReport(const TapNet& net, const LabeledImageSet& set,
                                  const BoundaryOptions& options, std::uint64_t images,
                                  std::uint64_t repeats, std::uint64_t seed);

}  // namespace pixreg

#endif  // PIXREG_ATTACKS_H_
