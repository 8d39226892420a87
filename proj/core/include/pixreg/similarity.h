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

// Centered cosine similarity between flattened vectors (images or feature
// maps): each vector has its own mean subtracted, is L2-normalized, and the
// similarity of a pair is the dot product of the results.

#ifndef PIXREG_SIMILARITY_H_
#define PIXREG_SIMILARITY_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pixreg/autodiff.h"
#include "pixreg/tensor.h"

namespace pixreg {

using IndexPair = std::pair<std::size_t, std::size_t>;

// Number of unordered pairs among n items.
constexpr std::uint64_t PairCount(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

// Index of pair (i, j), i != j, in a strictly-lower-triangle row-major layout.
constexpr std::uint64_t TriangleIndex(std::uint64_t i, std::uint64_t j) {
  if (i < j) std::swap(i, j);
  return i * (i - 1) / 2 + j;
}

// images: (N, ...) with N >= 2. Returns the (N, N) similarity matrix, exactly
// symmetric with a unit diagonal. A constant image is rejected with kInvalidArgument.
Tensor PixelSimilarity(const Tensor& images);

// Same values as PixelSimilarity, strictly lower triangle only (i > j,
// TriangleIndex order). Used for large N where the dense matrix is wasteful.
std::vector<float> PixelSimilarityTriangle(const Tensor& images);

// features: (P, F) (or (P, ...), flattened per row). `label` prefixes the
// error raised for a zero vector after centering.
Tensor LayerSimilarity(const Tensor& features, const std::string& label = "features");

// Differentiable centered cosine for selected row pairs of `features`.
// Output shape (pairs.size()).
Var PairCosine(Var features, const std::vector<IndexPair>& pairs,
               const std::string& label = "features");

// Differentiable full (P, P) similarity matrix of the rows of `features`.
Var SimilarityMatrix(Var features, const std::string& label = "features");

}  // namespace pixreg

#endif  // PIXREG_SIMILARITY_H_
