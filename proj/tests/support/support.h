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


// Shared helpers for the unit and acceptance suites.

#ifndef PIXREG_TESTS_SUPPORT_H_
#define PIXREG_TESTS_SUPPORT_H_

#include <stdlib.h>

#include <cmath>
#include <filesystem>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "pixreg/autodiff.h"
#include "pixreg/config.h"
#include "pixreg/errors.h"
#include "pixreg/tensor.h"
#include "pixreg/trainer.h"

namespace testing {

inline std::string DataDir() { return PIXREG_TEST_DATA_DIR; }

inline std::string MnistTrain() {
  return "idx:" + DataDir() + "/mnist/train-images-idx3-ubyte," + DataDir() +
         "/mnist/train-labels-idx1-ubyte";
}

inline std::string MnistTest() {
  return "idx:" + DataDir() + "/mnist/t10k-images-idx3-ubyte," + DataDir() +
         "/mnist/t10k-labels-idx1-ubyte";
}

// Small MNIST config for integration tests.
inline pixreg::ExperimentConfig TinyConfig(std::uint64_t train = 256, std::uint64_t reg = 32) {
  pixreg::ExperimentConfig c;
  c.train_data = MnistTrain();
  c.test_data = MnistTest();
  c.train_limit = train;
  c.test_limit = 200;
  c.num_reg_images = reg;
  c.epochs = 1;
  return c;
}

// A quickly trained small MNIST classifier and its held-out set.
struct SmallModel {
  pixreg::TrainData data;
  pixreg::TrainResult result;
};

inline SmallModel TrainSmallModel(std::uint64_t seed = 1, std::uint64_t train = 2048) {
  pixreg::ExperimentConfig c = TinyConfig(train, 32);
  c.arch = "conv8,relu,pool2,conv16,relu,pool2,fc10";
  c.test_limit = 500;
  c.batch_size = 32;
  c.seed = seed;
  pixreg::TrainData data = pixreg::PrepareData(c);
  pixreg::TrainResult result = pixreg::Train(c, data);
  return {std::move(data), std::move(result)};
}

inline pixreg::Tensor RandomTensor(pixreg::Shape shape, std::mt19937_64& rng, double lo = -1.0,
                                   double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  pixreg::Tensor t(std::move(shape));
  for (float& v : t.data()) v = static_cast<float>(dist(rng));
  return t;
}

inline std::vector<double> ToDouble(const pixreg::Tensor& t) {
  return std::vector<double>(t.data().begin(), t.data().end());
}

// Category of the pixreg::Error thrown by `f`, or nullopt when it returns.
template <typename F>
std::optional<pixreg::ErrorCode> ErrorOf(F&& f) {
  try {
    f();
  } catch (const pixreg::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "pixreg-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct GradCheck {
  double rel_error = 0.0;  // |analytic - numeric| / max(|analytic|, |numeric|), norm-wise
  std::size_t coords = 0;
  std::size_t skipped = 0;  // coordinates where f is not smooth within +-h
};

// Compares `analytic` against central differences of the 64-bit function `f`
// at `x0` with step h. Each coordinate is also sampled at +-h/2; when the
// three second differences on that grid disagree by more than
// kink_tol * h * max(1, |numeric|), the segment holds a kink (ReLU, clamp)
// and the coordinate is skipped.
inline GradCheck CheckGradient(const std::vector<double>& analytic,
                               const std::function<double(const std::vector<double>&)>& f,
                               std::vector<double> x0, double h = 1e-3, double kink_tol = 1e-5) {
  GradCheck out;
  const double f0 = f(x0);
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  for (std::size_t i = 0; i < x0.size(); ++i) {
    const double keep = x0[i];
    auto at = [&](double offset) {
      x0[i] = keep + offset;
      return f(x0);
    };
    const double fm = at(-h), fmh = at(-h / 2), fph = at(h / 2), fp = at(h);
    x0[i] = keep;
    const double numeric = (fp - fm) / (2.0 * h);
    const double s1 = fm - 2.0 * fmh + f0, s2 = fmh - 2.0 * f0 + fph, s3 = f0 - 2.0 * fph + fp;
    const double spread = std::max({s1, s2, s3}) - std::min({s1, s2, s3});
    if (spread > kink_tol * h * std::max(1.0, std::abs(numeric))) {
      ++out.skipped;
      continue;
    }
    ++out.coords;
    diff2 += (analytic[i] - numeric) * (analytic[i] - numeric);
    a2 += analytic[i] * analytic[i];
    n2 += numeric * numeric;
  }
  const double scale = std::max({std::sqrt(a2), std::sqrt(n2), 1e-12});
  out.rel_error = std::sqrt(diff2) / scale;
  return out;
}

}  // namespace testing

#endif  // PIXREG_TESTS_SUPPORT_H_
