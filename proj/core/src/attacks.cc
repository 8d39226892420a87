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


#include "pixreg/attacks.h"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>

#include "pixreg/errors.h"
#include "pixreg/layers.h"
#include "pixreg/rng.h"

namespace pixreg {
namespace {

constexpr std::size_t kAttackBatch = 250;

float Clip01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

double Distance(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = static_cast<double>(a[k]) - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

// Rolling success counter that rescales a step size every `window` trials.
struct StepAdapter {
  double value;
  std::uint64_t window;
  double factor;
  double cap;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;

  void Record(bool success) {
    ++trials;
    successes += success;
    if (trials < window) return;
    const double rate = static_cast<double>(successes) / static_cast<double>(trials);
    if (rate > 0.5) value = std::min(value * factor, cap);
    if (rate < 0.5) value /= factor;
    trials = successes = 0;
  }
};

}  // namespace

std::string_view NoiseFamilyName(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::kGaussian: return "gaussian";
    case NoiseFamily::kUniform: return "uniform";
    case NoiseFamily::kSaltPepper: return "salt_pepper";
  }
  return "?";
}

NoiseFamily ParseNoiseFamily(std::string_view name) {
  for (auto f : {NoiseFamily::kGaussian, NoiseFamily::kUniform, NoiseFamily::kSaltPepper}) {
    if (NoiseFamilyName(f) == name) return f;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown noise family '" + std::string(name) + "'");
}

void ApplyNoise(std::span<float> image, NoiseFamily family, double eps, double c,
                std::mt19937_64& rng) {
  Require(eps >= 0.0 && std::isfinite(eps), ErrorCode::kInvalidArgument,
          "noise eps must be finite and >= 0");
  if (eps == 0.0) return;
  switch (family) {
    case NoiseFamily::kGaussian: {
      std::normal_distribution<double> z(0.0, 1.0);
      for (float& v : image) v = Clip01(v + eps * z(rng));
      break;
    }
    case NoiseFamily::kUniform: {
      std::uniform_real_distribution<double> u(-eps, eps);
      for (float& v : image) v = Clip01(v + u(rng));
      break;
    }
    case NoiseFamily::kSaltPepper: {
      Require(c >= 0.0, ErrorCode::kInvalidArgument, "salt_pepper multiplier must be >= 0");
      std::bernoulli_distribution replace(std::min(eps * c, 1.0));
      std::bernoulli_distribution salt(0.5);
      for (float& v : image) {
        if (replace(rng)) v = salt(rng) ? 1.0f : 0.0f;
      }
      break;
    }
  }
}

Tensor ApplyNoise(const Tensor& x, const NoiseSpec& spec) {
  Tensor out = x;
  std::mt19937_64 rng = MakeRng(spec.seed, streams::kAttack);
  ApplyNoise(out.data(), spec.family, spec.eps, spec.c, rng);
  return out;
}

ImageTransform NoiseTransform(NoiseFamily family, double eps, double c) {
  Require(eps >= 0.0, ErrorCode::kInvalidArgument, "noise eps must be >= 0");
  return [family, eps, c](std::span<float> image, std::mt19937_64& rng) {
    ApplyNoise(image, family, eps, c, rng);
  };
}

Tensor Fgsm(const TapNet& net, const Tensor& x, std::span<const int> labels, double eps) {
  Require(eps >= 0.0, ErrorCode::kInvalidArgument, "fgsm eps must be >= 0");
  if (eps == 0.0) return x;
  Tape tape;
  const Var input = tape.Input(x);
  const TapOutputs out = net.ForwardFrozen(tape, input);
  const Var loss = ops::SoftmaxCrossEntropy(out.logits, labels, ops::Reduction::kSum);
  tape.Backward(loss);
  const Tensor& grad = tape.Grad(input);
  Require(grad.AllFinite(), ErrorCode::kNumeric, "fgsm: non-finite input gradient");
  Tensor adv = x;
  for (std::size_t i = 0; i < adv.size(); ++i) {
    const float g = grad[i];
    const double sign = g > 0.0f ? 1.0 : (g < 0.0f ? -1.0 : 0.0);
    adv[i] = Clip01(static_cast<double>(x[i]) + eps * sign);
  }
  return adv;
}

AttackReport NoiseAttack(const TapNet& net, const LabeledImageSet& set, NoiseFamily family,
                         std::span<const double> eps_grid, std::uint64_t seed, double c) {
  Require(!eps_grid.empty(), ErrorCode::kInvalidArgument, "empty eps grid");
  AttackReport report;
  report.attack = "noise:" + std::string(NoiseFamilyName(family));
  report.seeds = {seed};
  for (double eps : eps_grid) {
    report.curve.push_back({eps, Evaluate(net, set, NoiseTransform(family, eps, c), seed)});
  }
  return report;
}

AttackReport TransferAttack(const TapNet& substitute, const TapNet& target,
                            const LabeledImageSet& set, std::span<const double> eps_grid) {
  Require(!eps_grid.empty(), ErrorCode::kInvalidArgument, "empty eps grid");
  Require(substitute.arch().in_channels == target.arch().in_channels &&
              substitute.arch().in_height == target.arch().in_height &&
              substitute.arch().in_width == target.arch().in_width,
          ErrorCode::kShapeMismatch, "substitute and target nets differ in input shape");
  AttackReport report;
  report.attack = &substitute == &target ? "fgsm" : "transfer_fgsm";
  std::vector<std::size_t> correct(eps_grid.size(), 0);
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < set.size(); start += kAttackBatch) {
    const std::size_t count = std::min(kAttackBatch, set.size() - start);
    idx.resize(count);
    std::iota(idx.begin(), idx.end(), start);
    const Tensor batch = set.Batch(idx);
    const std::vector<int> labels = set.BatchLabels(idx);
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
      const std::vector<int> predicted = target.Predict(Fgsm(substitute, batch, labels, eps_grid[e]));
      for (std::size_t b = 0; b < count; ++b) correct[e] += predicted[b] == labels[b];
    }
  }
  for (std::size_t e = 0; e < eps_grid.size(); ++e) {
    report.curve.push_back(
        {eps_grid[e], static_cast<double>(correct[e]) / static_cast<double>(set.size())});
  }
  return report;
}

BoundaryResult BoundaryAttack(const DecisionFn& decide, std::span<const float> x, int label,
                              const BoundaryOptions& options, std::uint64_t seed,
                              const AcceptObserver& on_accept) {
  Require(!x.empty(), ErrorCode::kInvalidArgument, "boundary attack on an empty image");
  const std::size_t d = x.size();
  BoundaryResult result;
  auto adversarial = [&](std::span<const float> z) {
    ++result.queries;
    return decide(z) != label;
  };

  if (adversarial(x)) {
    result.success = true;
    result.adversarial.assign(x.begin(), x.end());
    result.trajectory.push_back(0.0);
    if (on_accept) on_accept(result.adversarial, 0.0);
    return result;
  }

  std::mt19937_64 rng = MakeRng(seed, streams::kAttack);
  std::uniform_real_distribution<float> uniform(0.0f, 1.0f);
  std::vector<float> start(d);
  bool found = false;
  for (std::uint64_t draw = 0; draw < options.init_draws && !found; ++draw) {
    for (float& v : start) v = uniform(rng);
    found = adversarial(start);
  }
  if (!found) return result;

  // Bisection on the blend x + t (start - x), t = 1 adversarial.
  std::vector<float> blend(d);
  auto make_blend = [&](double t) {
    for (std::size_t k = 0; k < d; ++k) blend[k] = static_cast<float>(x[k] + t * (start[k] - x[k]));
  };
  double lo = 0.0, hi = 1.0;
  for (std::uint64_t s = 0; s < options.bisection_steps; ++s) {
    const double mid = 0.5 * (lo + hi);
    make_blend(mid);
    if (adversarial(blend)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  make_blend(hi);
  std::vector<float> current = blend;
  double dist = Distance(current, x);
  result.success = true;
  result.trajectory.push_back(dist);
  if (on_accept) on_accept(current, dist);

  StepAdapter delta{options.delta, options.window, options.adapt_factor, 1e6};
  StepAdapter inward{options.epsilon, options.window, options.adapt_factor, 0.99};
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> eta(d);
  std::vector<float> candidate(d), stepped(d);
  for (std::uint64_t step = 0; step < options.steps && dist > 0.0; ++step) {
    // Orthogonal proposal on the sphere of radius dist around x.
    double radial = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      eta[k] = normal(rng);
      radial += eta[k] * (current[k] - x[k]) / dist;
    }
    double eta_norm2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      eta[k] -= radial * (current[k] - x[k]) / dist;
      eta_norm2 += eta[k] * eta[k];
    }
    const double scale = eta_norm2 > 0.0 ? delta.value * dist / std::sqrt(eta_norm2) : 0.0;
    double offset_norm2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      eta[k] = current[k] - x[k] + scale * eta[k];
      offset_norm2 += eta[k] * eta[k];
    }
    const double renorm = offset_norm2 > 0.0 ? dist / std::sqrt(offset_norm2) : 0.0;
    for (std::size_t k = 0; k < d; ++k) candidate[k] = Clip01(x[k] + renorm * eta[k]);
    const bool orth_ok = adversarial(candidate);
    delta.Record(orth_ok);

    if (orth_ok) {
      for (std::size_t k = 0; k < d; ++k) {
        stepped[k] = static_cast<float>(candidate[k] + inward.value * (x[k] - candidate[k]));
      }
      const bool inward_ok = adversarial(stepped);
      inward.Record(inward_ok);
      if (inward_ok) {
        const double next = Distance(stepped, x);
        if (next <= dist) {
          current = stepped;
          dist = next;
          if (on_accept) on_accept(current, dist);
        }
      }
    }
    result.trajectory.push_back(dist);
  }
  result.adversarial = std::move(current);
  result.distance = dist;
  return result;
}

double MedianOf(std::vector<double> values) {
  Require(!values.empty(), ErrorCode::kInvalidArgument, "median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double BoundaryScore(std::span<const std::vector<float>> perturbations) {
  Require(!perturbations.empty(), ErrorCode::kInvalidArgument, "boundary score needs perturbations");
  const std::size_t d = perturbations.front().size();
  Require(d > 0, ErrorCode::kInvalidArgument, "empty perturbation");
  std::vector<double> per_image;
  for (const auto& eta : perturbations) {
    Require(eta.size() == d, ErrorCode::kShapeMismatch, "perturbations differ in size");
    double s = 0.0;
    for (float v : eta) s += static_cast<double>(v) * v;
    per_image.push_back(s / static_cast<double>(d));
  }
  return MedianOf(std::move(per_image));
}

DecisionFn NetDecision(const TapNet& net, const Shape& image_shape) {
  Shape batch_shape = image_shape;
  batch_shape.insert(batch_shape.begin(), 1);
  return [&net, batch_shape](std::span<const float> image) {
    Tensor batch(batch_shape, std::vector<float>(image.begin(), image.end()));
    return net.Predict(batch)[0];
  };
}

AttackReport BoundaryAttackReport(const TapNet& net, const LabeledImageSet& set,
                                  const BoundaryOptions& options, std::uint64_t images,
                                  std::uint64_t repeats, std::uint64_t seed) {
  Require(images > 0 && repeats > 0, ErrorCode::kInvalidArgument,
          "boundary attack needs at least one image and one repeat");
  images = std::min<std::uint64_t>(images, set.size());
  AttackReport report;
  report.attack = "boundary";
  report.boundary = options;
  report.images = images;
  report.repeats = repeats;
  const Shape image_shape(set.images.shape().begin() + 1, set.images.shape().end());
  const DecisionFn decide = NetDecision(net, image_shape);
  const double d = static_cast<double>(set.pixels_per_image());
  for (std::uint64_t r = 0; r < repeats; ++r) {
    const std::uint64_t repeat_seed = DeriveSeed(seed, r);
    report.seeds.push_back(repeat_seed);
    std::vector<double> scores;
    for (std::uint64_t i = 0; i < images; ++i) {
      const BoundaryResult res =
          BoundaryAttack(decide, set.images.Row(i), set.labels[i], options, DeriveSeed(repeat_seed, i));
      if (!res.success) {
        ++report.failures;
        continue;
      }
      scores.push_back(res.distance * res.distance / d);
    }
    report.repeat_scores.push_back(scores.empty() ? 0.0 : MedianOf(scores));
    report.per_image.push_back(std::move(scores));
  }
  report.score = std::accumulate(report.repeat_scores.begin(), report.repeat_scores.end(), 0.0) /
                 static_cast<double>(repeats);
  return report;
}

std::string AttackReport::ToJson() const {
  nlohmann::json j;
  j["attack"] = attack;
  j["seeds"] = seeds;
  if (!curve.empty()) {
    nlohmann::json points = nlohmann::json::array();
    for (const AccuracyPoint& p : curve) points.push_back({{"eps", p.eps}, {"accuracy", p.accuracy}});
    j["curve"] = points;
  }
  if (attack == "boundary") {
    j["steps"] = boundary.steps;
    j["init_draws"] = boundary.init_draws;
    j["bisection_steps"] = boundary.bisection_steps;
    j["images"] = images;
    j["repeats"] = repeats;
    j["per_image"] = per_image;
    j["repeat_scores"] = repeat_scores;
    j["score"] = score;
    j["failures"] = failures;
  }
  return j.dump(2);
}

}  // namespace pixreg
