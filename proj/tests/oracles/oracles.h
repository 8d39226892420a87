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


// Independent 64-bit reference implementations used as test oracles. None of
// them share code with the library under test.

#ifndef PIXREG_TESTS_ORACLES_H_
#define PIXREG_TESTS_ORACLES_H_

#include <complex>
#include <cstddef>
#include <vector>

#include "pixreg/tapnet.h"

namespace oracle {

// arctanh(1 - 1e-6) and 2 * arctanh(1 - 1e-6)^2, from 40-digit arithmetic.
inline constexpr double kAtanhBound = 7.254328619262047206741757;
inline constexpr double kSinglePairLoss = 105.2505674324888005277203;
inline constexpr double kLn3 = 1.098612288668109691395245;

// 0.5 * (log1p(t) - log1p(-t)) in long double.
double Atanh(double t);

// Straight-line forward pass of `arch` in double precision. `params` are the
// TapNet parameters in declaration order, `input` is (batch, C, H, W)
// row-major. Returns (batch, classes) logits; `taps`, when given, receives
// the output of every tap layer.
std::vector<double> ReferenceForward(const pixreg::Architecture& arch,
                                     const std::vector<std::vector<double>>& params,
                                     const std::vector<double>& input, std::size_t batch,
                                     std::vector<std::vector<double>>* taps = nullptr);

// Centered cosine of two vectors, computed from the textbook formula.
double CenteredCosine(const std::vector<double>& a, const std::vector<double>& b);

// Two-pass Pearson correlation.
double Pearson(const std::vector<double>& x, const std::vector<double>& y);

// Unnormalized forward 2-d DFT by direct summation, natural (uncentered) order.
std::vector<std::complex<double>> Dft2d(const std::vector<double>& x, std::size_t h, std::size_t w);

}  // namespace oracle

#endif  // PIXREG_TESTS_ORACLES_H_
