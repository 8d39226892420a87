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

#include "pixreg/similarity.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <memory>

#include "pixreg/errors.h"

namespace pixreg {
namespace {

using RowMatrixD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Centered, unit-norm copy of every row, in double precision.
RowMatrixD CenteredUnitRows(const Tensor& rows, const std::string& label) {
  Require(rows.rank() >= 2, ErrorCode::kShapeMismatch,
          label + ": expected (N, ...) input, got " + ShapeToString(rows.shape()));
  const std::size_t n = rows.dim(0);
  Require(n >= 2, ErrorCode::kInvalidArgument, label + ": need at least two vectors");
  const std::size_t d = rows.size() / n;
  RowMatrixD out(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = rows.Row(i);
    double mean = 0.0;
    for (float v : row) mean += v;
    mean /= static_cast<double>(d);
    double norm2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double c = row[k] - mean;
      out(i, k) = c;
      norm2 += c * c;
    }
    if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
      Fail(ErrorCode::kInvalidArgument,
           label + ": vector " + std::to_string(i) + " is constant (zero after mean subtraction)");
    }
    out.row(i) /= std::sqrt(norm2);
  }
  return out;
}

float ClampUnit(double v) { return static_cast<float>(std::clamp(v, -1.0, 1.0)); }

Tensor FullFromUnitRows(const RowMatrixD& unit) {
  const std::size_t n = static_cast<std::size_t>(unit.rows());
  const RowMatrixD gram = unit * unit.transpose();
  Tensor out({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    out.at({i, i}) = 1.0f;
    for (std::size_t j = 0; j < i; ++j) {
      const float s = ClampUnit(gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      out.at({i, j}) = s;
      out.at({j, i}) = s;
    }
  }
  return out;
}

struct CenteredRow {
  std::vector<double> centered;
  double norm = 0.0;
};

CenteredRow CenterRow(std::span<const float> row, const std::string& label, std::size_t index) {
  CenteredRow out;
  double mean = 0.0;
  for (float v : row) mean += v;
  mean /= static_cast<double>(row.size());
  out.centered.resize(row.size());
  double norm2 = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    out.centered[k] = row[k] - mean;
    norm2 += out.centered[k] * out.centered[k];
  }
  if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
    Fail(ErrorCode::kInvalidArgument,
         label + ": image " + std::to_string(index) + " has a zero vector after mean subtraction");
  }
  out.norm = std::sqrt(norm2);
  return out;
}

}  // namespace

Tensor PixelSimilarity(const Tensor& images) {
  return FullFromUnitRows(CenteredUnitRows(images, "pixel similarity"));
}

std::vector<float> PixelSimilarityTriangle(const Tensor& images) {
  const RowMatrixD unit = CenteredUnitRows(images, "pixel similarity");
  const Eigen::Index n = unit.rows();
  std::vector<float> tri(PairCount(static_cast<std::uint64_t>(n)));
  constexpr Eigen::Index kBlock = 256;
  for (Eigen::Index start = 0; start < n; start += kBlock) {
    const Eigen::Index rows = std::min(kBlock, n - start);
    const Eigen::Index cols = start + rows;  // only j < i is needed
    const RowMatrixD block = unit.middleRows(start, rows) * unit.topRows(cols).transpose();
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Eigen::Index i = start + r;
      for (Eigen::Index j = 0; j < i; ++j) {
        tri[TriangleIndex(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j))] =
            ClampUnit(block(r, j));
      }
    }
  }
  return tri;
}

Tensor LayerSimilarity(const Tensor& features, const std::string& label) {
  return FullFromUnitRows(CenteredUnitRows(features, label));
}

Var PairCosine(Var features, const std::vector<IndexPair>& pairs, const std::string& label) {
  const Tensor& fv = features.value();
  Require(fv.rank() >= 2, ErrorCode::kShapeMismatch,
          label + ": expected (P, ...) features, got " + ShapeToString(fv.shape()));
  Require(!pairs.empty(), ErrorCode::kInvalidArgument, label + ": no pairs requested");
  const std::size_t rows = fv.dim(0);
  for (const auto& [a, b] : pairs) {
    Require(a < rows && b < rows && a != b, ErrorCode::kInvalidArgument,
            label + ": bad pair index");
  }

  // Centering is done once per referenced row.
  auto centered = std::make_shared<std::vector<CenteredRow>>(rows);
  for (const auto& [a, b] : pairs) {
    for (std::size_t idx : {a, b}) {
      if ((*centered)[idx].centered.empty()) (*centered)[idx] = CenterRow(fv.Row(idx), label, idx);
    }
  }

  Tensor out({pairs.size()});
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const CenteredRow& u = (*centered)[pairs[p].first];
    const CenteredRow& v = (*centered)[pairs[p].second];
    double dot = 0.0;
    for (std::size_t k = 0; k < u.centered.size(); ++k) dot += u.centered[k] * v.centered[k];
    out[p] = static_cast<float>(dot / (u.norm * v.norm));
  }

  Tape* tape = features.tape();
  return tape->Record(
      std::move(out), {features},
      [pairs, centered](const Tensor& grad, std::span<Tensor* const> in) {
        if (!in[0]) return;
        const std::size_t d = in[0]->size() / in[0]->dim(0);
        std::vector<double> gu(d), gv(d);
        for (std::size_t p = 0; p < pairs.size(); ++p) {
          const double g = grad[p];
          if (g == 0.0) continue;
          const CenteredRow& u = (*centered)[pairs[p].first];
          const CenteredRow& v = (*centered)[pairs[p].second];
          double dot = 0.0;
          for (std::size_t k = 0; k < d; ++k) dot += u.centered[k] * v.centered[k];
          const double nn = u.norm * v.norm;
          const double c = dot / nn;
          double mean_u = 0.0, mean_v = 0.0;
          for (std::size_t k = 0; k < d; ++k) {
            gu[k] = g * (v.centered[k] / nn - c * u.centered[k] / (u.norm * u.norm));
            gv[k] = g * (u.centered[k] / nn - c * v.centered[k] / (v.norm * v.norm));
            mean_u += gu[k];
            mean_v += gv[k];
          }
          mean_u /= static_cast<double>(d);
          mean_v /= static_cast<double>(d);
          // Back through the per-row mean subtraction.
          auto da = in[0]->Row(pairs[p].first);
          auto db = in[0]->Row(pairs[p].second);
          for (std::size_t k = 0; k < d; ++k) {
            da[k] += static_cast<float>(gu[k] - mean_u);
            db[k] += static_cast<float>(gv[k] - mean_v);
          }
        }
      });
}

Var SimilarityMatrix(Var features, const std::string& label) {
  const std::size_t n = features.value().dim(0);
  Require(n >= 2, ErrorCode::kInvalidArgument, label + ": need at least two vectors");
  std::vector<IndexPair> pairs;
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) pairs.emplace_back(i, j);
  }
  Var cos = PairCosine(features, pairs, label);
  Tensor out({n, n});
  for (std::size_t i = 0; i < n; ++i) out.at({i, i}) = 1.0f;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    const float s = std::clamp(cos.value()[p], -1.0f, 1.0f);
    out.at({i, j}) = s;
    out.at({j, i}) = s;
  }
  Tape* tape = features.tape();
  return tape->Record(std::move(out), {cos},
                      [pairs, n](const Tensor& grad, std::span<Tensor* const> in) {
                        if (!in[0]) return;
                        for (std::size_t p = 0; p < pairs.size(); ++p) {
                          const auto [i, j] = pairs[p];
                          (*in[0])[p] += grad[i * n + j] + grad[j * n + i];
                        }
                      });
}

}  // namespace pixreg
