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


#include "pixreg/sim_loss.h"

#include <cmath>
#include <vector>

#include "pixreg/errors.h"

namespace pixreg {
namespace {

struct Residual {
  double r;      // atanh(clamped s) - atanh(t)
  double slope;  // d atanh(clamped s) / ds, 0 when clamped
};

Residual ResidualOf(float s, double atanh_t, double eps) {
  if (std::isnan(s)) Fail(ErrorCode::kNumeric, "similarity loss: NaN in CNN similarity");
  const double bound = 1.0 - eps;
  double c = s;
  double slope = 0.0;
  if (c >= bound) {
    c = bound;
  } else if (c <= -bound) {
    c = -bound;
  } else {
    slope = 1.0 / (1.0 - c * c);
  }
  return {std::atanh(c) - atanh_t, slope};
}

void CheckEps(double eps) {
  Require(eps > 0.0 && eps < 0.5, ErrorCode::kInvalidArgument, "eps_clamp must lie in (0, 0.5)");
}

// Flattened (entry index, atanh target) list of the contributing entries.
struct MatrixTerms {
  std::vector<std::size_t> index;
  std::vector<double> atanh_t;
};

MatrixTerms CollectTerms(const Shape& shape, const SimilarityTarget& target) {
  const std::size_t n = target.size();
  Require(shape == Shape{n, n}, ErrorCode::kShapeMismatch,
          "similarity loss: CNN similarity " + ShapeToString(shape) + " vs target over " +
              std::to_string(n) + " images");
  const double eps = target.params().eps_clamp;
  MatrixTerms terms;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || !target.masked(i, j)) continue;
      terms.index.push_back(i * n + j);
      terms.atanh_t.push_back(TargetArctanh(target.value(i, j), eps));
    }
  }
  return terms;
}

}  // namespace

Var SimLossPairs(Var s_cnn, std::span<const float> targets, double eps_clamp,
                 double pair_weight) {
  CheckEps(eps_clamp);
  const Tensor& s = s_cnn.value();
  Require(s.size() == targets.size(), ErrorCode::kShapeMismatch,
          "similarity loss: " + std::to_string(s.size()) + " CNN entries vs " +
              std::to_string(targets.size()) + " targets");
  std::vector<double> dlds(s.size());
  double total = 0.0;
  for (std::size_t p = 0; p < s.size(); ++p) {
    const Residual res = ResidualOf(s[p], TargetArctanh(targets[p], eps_clamp), eps_clamp);
    total += pair_weight * res.r * res.r;
    dlds[p] = 2.0 * pair_weight * res.r * res.slope;
  }
  return s_cnn.tape()->Record(
      Tensor::Scalar(static_cast<float>(total)), {s_cnn},
      [dlds = std::move(dlds)](const Tensor& g, std::span<Tensor* const> in) {
        if (!in[0]) return;
        const double scale = g[0];
        for (std::size_t p = 0; p < dlds.size(); ++p) {
          (*in[0])[p] += static_cast<float>(scale * dlds[p]);
        }
      });
}

double SimLossPairsValue(std::span<const float> s_cnn, std::span<const float> targets,
                         double eps_clamp, double pair_weight) {
  CheckEps(eps_clamp);
  Require(s_cnn.size() == targets.size(), ErrorCode::kShapeMismatch,
          "similarity loss: CNN entries and targets differ in count");
  double total = 0.0;
  for (std::size_t p = 0; p < s_cnn.size(); ++p) {
    const Residual res = ResidualOf(s_cnn[p], TargetArctanh(targets[p], eps_clamp), eps_clamp);
    total += pair_weight * res.r * res.r;
  }
  return total;
}

Var SimLossMatrix(Var s_cnn, const SimilarityTarget& target) {
  const MatrixTerms terms = CollectTerms(s_cnn.shape(), target);
  const double eps = target.params().eps_clamp;
  const Tensor& s = s_cnn.value();
  std::vector<double> dlds(terms.index.size());
  double total = 0.0;
  for (std::size_t t = 0; t < terms.index.size(); ++t) {
    const Residual res = ResidualOf(s[terms.index[t]], terms.atanh_t[t], eps);
    total += res.r * res.r;
    dlds[t] = 2.0 * res.r * res.slope;
  }
  return s_cnn.tape()->Record(
      Tensor::Scalar(static_cast<float>(total)), {s_cnn},
      [index = terms.index, dlds = std::move(dlds)](const Tensor& g,
                                                    std::span<Tensor* const> in) {
        if (!in[0]) return;
        const double scale = g[0];
        for (std::size_t t = 0; t < index.size(); ++t) {
          (*in[0])[index[t]] += static_cast<float>(scale * dlds[t]);
        }
      });
}

double SimLossMatrixValue(const Tensor& s_cnn, const SimilarityTarget& target) {
  const MatrixTerms terms = CollectTerms(s_cnn.shape(), target);
  const double eps = target.params().eps_clamp;
  double total = 0.0;
  for (std::size_t t = 0; t < terms.index.size(); ++t) {
    const Residual res = ResidualOf(s_cnn[terms.index[t]], terms.atanh_t[t], eps);
    total += res.r * res.r;
  }
  return total;
}

}  // namespace pixreg
