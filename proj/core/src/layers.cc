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

#include "pixreg/layers.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "pixreg/errors.h"

namespace pixreg::ops {
namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

struct ConvGeometry {
  std::size_t batch, channels, height, width;
  std::size_t out_channels, kernel, stride, padding;
  std::size_t out_height, out_width;

  std::size_t patch() const { return channels * kernel * kernel; }
  std::size_t plane() const { return out_height * out_width; }
  std::size_t columns() const { return batch * plane(); }
};

// Unfolds x into a (C*k*k, B*Ho*Wo) row-major matrix.
void Im2Col(const float* x, const ConvGeometry& g, float* col) {
  const std::size_t n = g.columns();
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ki = 0; ki < g.kernel; ++ki) {
      for (std::size_t kj = 0; kj < g.kernel; ++kj) {
        float* row = col + ((c * g.kernel + ki) * g.kernel + kj) * n;
        for (std::size_t b = 0; b < g.batch; ++b) {
          const float* xc = x + (b * g.channels + c) * g.height * g.width;
          for (std::size_t oh = 0; oh < g.out_height; ++oh) {
            float* dst = row + b * g.plane() + oh * g.out_width;
            const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * g.stride + ki) -
                                      static_cast<std::ptrdiff_t>(g.padding);
            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.height)) {
              std::fill(dst, dst + g.out_width, 0.0f);
              continue;
            }
            const float* src = xc + ih * g.width;
            for (std::size_t ow = 0; ow < g.out_width; ++ow) {
              const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * g.stride + kj) -
                                        static_cast<std::ptrdiff_t>(g.padding);
              dst[ow] = (iw >= 0 && iw < static_cast<std::ptrdiff_t>(g.width)) ? src[iw] : 0.0f;
            }
          }
        }
      }
    }
  }
}

// Adjoint of Im2Col: scatters column gradients back onto the input layout.
void Col2ImAdd(const float* col, const ConvGeometry& g, float* dx) {
  const std::size_t n = g.columns();
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ki = 0; ki < g.kernel; ++ki) {
      for (std::size_t kj = 0; kj < g.kernel; ++kj) {
        const float* row = col + ((c * g.kernel + ki) * g.kernel + kj) * n;
        for (std::size_t b = 0; b < g.batch; ++b) {
          float* xc = dx + (b * g.channels + c) * g.height * g.width;
          for (std::size_t oh = 0; oh < g.out_height; ++oh) {
            const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * g.stride + ki) -
                                      static_cast<std::ptrdiff_t>(g.padding);
            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.height)) continue;
            const float* src = row + b * g.plane() + oh * g.out_width;
            float* dst = xc + ih * g.width;
            for (std::size_t ow = 0; ow < g.out_width; ++ow) {
              const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * g.stride + kj) -
                                        static_cast<std::ptrdiff_t>(g.padding);
              if (iw >= 0 && iw < static_cast<std::ptrdiff_t>(g.width)) dst[iw] += src[ow];
            }
          }
        }
      }
    }
  }
}

}  // namespace

Var Conv2d(Var x, Var weight, Var bias, int stride, int padding) {
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  Require(xv.rank() == 4, ErrorCode::kShapeMismatch,
          "Conv2d: input must be (B, C, H, W), got " + ShapeToString(xv.shape()));
  Require(wv.rank() == 4 && wv.dim(2) == wv.dim(3), ErrorCode::kShapeMismatch,
          "Conv2d: weight must be (O, C, k, k), got " + ShapeToString(wv.shape()));
  Require(wv.dim(1) == xv.dim(1), ErrorCode::kShapeMismatch,
          "Conv2d: weight expects " + std::to_string(wv.dim(1)) + " input channels, got " +
              std::to_string(xv.dim(1)));
  Require(bias.value().size() == wv.dim(0), ErrorCode::kShapeMismatch,
          "Conv2d: bias size does not match output channels");
  Require(stride > 0 && padding >= 0, ErrorCode::kInvalidArgument, "Conv2d: bad stride/padding");

  ConvGeometry g{};
  g.batch = xv.dim(0);
  g.channels = xv.dim(1);
  g.height = xv.dim(2);
  g.width = xv.dim(3);
  g.out_channels = wv.dim(0);
  g.kernel = wv.dim(2);
  g.stride = static_cast<std::size_t>(stride);
  g.padding = static_cast<std::size_t>(padding);
  Require(g.height + 2 * g.padding >= g.kernel && g.width + 2 * g.padding >= g.kernel,
          ErrorCode::kShapeMismatch, "Conv2d: kernel larger than padded input");
  g.out_height = (g.height + 2 * g.padding - g.kernel) / g.stride + 1;
  g.out_width = (g.width + 2 * g.padding - g.kernel) / g.stride + 1;

  auto col = std::make_shared<std::vector<float>>(g.patch() * g.columns());
  Im2Col(xv.raw(), g, col->data());

  RowMatrix y(g.out_channels, g.columns());
  ConstMatrixMap w_mat(wv.raw(), g.out_channels, g.patch());
  ConstMatrixMap col_mat(col->data(), g.patch(), g.columns());
  y.noalias() = w_mat * col_mat;

  Tensor out({g.batch, g.out_channels, g.out_height, g.out_width});
  const float* bv = bias.value().raw();
  for (std::size_t b = 0; b < g.batch; ++b) {
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      const float* src = y.data() + o * g.columns() + b * g.plane();
      float* dst = out.raw() + (b * g.out_channels + o) * g.plane();
      for (std::size_t i = 0; i < g.plane(); ++i) dst[i] = src[i] + bv[o];
    }
  }

  Tape* tape = x.tape();
  const Tensor* w_ptr = &wv;
  return tape->Record(
      std::move(out), {x, weight, bias},
      [g, col, w_ptr](const Tensor& grad, std::span<Tensor* const> in) {
        RowMatrix dy(g.out_channels, g.columns());
        for (std::size_t b = 0; b < g.batch; ++b) {
          for (std::size_t o = 0; o < g.out_channels; ++o) {
            const float* src = grad.raw() + (b * g.out_channels + o) * g.plane();
            std::copy(src, src + g.plane(), dy.data() + o * g.columns() + b * g.plane());
          }
        }
        ConstMatrixMap col_mat(col->data(), g.patch(), g.columns());
        if (in[1]) {
          MatrixMap dw(in[1]->raw(), g.out_channels, g.patch());
          dw.noalias() += dy * col_mat.transpose();
        }
        if (in[2]) {
          float* db = in[2]->raw();
          for (std::size_t o = 0; o < g.out_channels; ++o) {
            double total = 0.0;
            const float* row = dy.data() + o * g.columns();
            for (std::size_t i = 0; i < g.columns(); ++i) total += row[i];
            db[o] += static_cast<float>(total);
          }
        }
        if (in[0]) {
          ConstMatrixMap w_mat(w_ptr->raw(), g.out_channels, g.patch());
          RowMatrix dcol(g.patch(), g.columns());
          dcol.noalias() = w_mat.transpose() * dy;
          Col2ImAdd(dcol.data(), g, in[0]->raw());
        }
      });
}

Var AvgPool(Var x, int size) {
  const Tensor& xv = x.value();
  Require(xv.rank() == 4, ErrorCode::kShapeMismatch,
          "AvgPool: input must be (B, C, H, W), got " + ShapeToString(xv.shape()));
  Require(size > 0, ErrorCode::kInvalidArgument, "AvgPool: window must be positive");
  const std::size_t p = static_cast<std::size_t>(size);
  const std::size_t bc = xv.dim(0) * xv.dim(1);
  const std::size_t h = xv.dim(2), w = xv.dim(3);
  Require(h >= p && w >= p, ErrorCode::kShapeMismatch, "AvgPool: window larger than input");
  const std::size_t oh = h / p, ow = w / p;
  const float scale = 1.0f / static_cast<float>(p * p);

  Tensor out({xv.dim(0), xv.dim(1), oh, ow});
  for (std::size_t m = 0; m < bc; ++m) {
    const float* src = xv.raw() + m * h * w;
    float* dst = out.raw() + m * oh * ow;
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        float total = 0.0f;
        for (std::size_t a = 0; a < p; ++a) {
          for (std::size_t b = 0; b < p; ++b) total += src[(i * p + a) * w + j * p + b];
        }
        dst[i * ow + j] = total * scale;
      }
    }
  }

  Tape* tape = x.tape();
  return tape->Record(std::move(out), {x},
                      [=](const Tensor& grad, std::span<Tensor* const> in) {
                        if (!in[0]) return;
                        for (std::size_t m = 0; m < bc; ++m) {
                          const float* src = grad.raw() + m * oh * ow;
                          float* dst = in[0]->raw() + m * h * w;
                          for (std::size_t i = 0; i < oh; ++i) {
                            for (std::size_t j = 0; j < ow; ++j) {
                              const float v = src[i * ow + j] * scale;
                              for (std::size_t a = 0; a < p; ++a) {
                                for (std::size_t b = 0; b < p; ++b) {
                                  dst[(i * p + a) * w + j * p + b] += v;
                                }
                              }
                            }
                          }
                        }
                      });
}

Var Linear(Var x, Var weight, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  const std::size_t batch = xv.dim(0);
  const std::size_t features = xv.size() / batch;
  Require(wv.rank() == 2 && wv.dim(1) == features, ErrorCode::kShapeMismatch,
          "Linear: weight " + ShapeToString(wv.shape()) + " does not accept " +
              std::to_string(features) + " input features");
  const std::size_t outputs = wv.dim(0);
  Require(bias.value().size() == outputs, ErrorCode::kShapeMismatch,
          "Linear: bias size does not match outputs");

  Tensor out({batch, outputs});
  ConstMatrixMap x_mat(xv.raw(), batch, features);
  ConstMatrixMap w_mat(wv.raw(), outputs, features);
  MatrixMap y(out.raw(), batch, outputs);
  y.noalias() = x_mat * w_mat.transpose();
  const float* bv = bias.value().raw();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < outputs; ++o) y(b, o) += bv[o];
  }

  Tape* tape = x.tape();
  const Tensor* x_ptr = &xv;
  const Tensor* w_ptr = &wv;
  return tape->Record(
      std::move(out), {x, weight, bias},
      [=](const Tensor& grad, std::span<Tensor* const> in) {
        ConstMatrixMap dy(grad.raw(), batch, outputs);
        if (in[0]) {
          MatrixMap dx(in[0]->raw(), batch, features);
          dx.noalias() += dy * ConstMatrixMap(w_ptr->raw(), outputs, features);
        }
        if (in[1]) {
          MatrixMap dw(in[1]->raw(), outputs, features);
          dw.noalias() += dy.transpose() * ConstMatrixMap(x_ptr->raw(), batch, features);
        }
        if (in[2]) {
          float* db = in[2]->raw();
          for (std::size_t o = 0; o < outputs; ++o) {
            double total = 0.0;
            for (std::size_t b = 0; b < batch; ++b) total += dy(b, o);
            db[o] += static_cast<float>(total);
          }
        }
      });
}

Var SoftmaxCrossEntropy(Var logits, std::span<const int> labels, Reduction reduction) {
  const Tensor& lv = logits.value();
  Require(lv.rank() == 2, ErrorCode::kShapeMismatch, "SoftmaxCrossEntropy: logits must be (B, K)");
  const std::size_t batch = lv.dim(0), classes = lv.dim(1);
  Require(labels.size() == batch, ErrorCode::kShapeMismatch,
          "SoftmaxCrossEntropy: " + std::to_string(labels.size()) + " labels for batch of " +
              std::to_string(batch));

  auto probs = std::make_shared<std::vector<float>>(batch * classes);
  std::vector<int> label_copy(labels.begin(), labels.end());
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const int y = label_copy[b];
    Require(y >= 0 && static_cast<std::size_t>(y) < classes, ErrorCode::kInvalidArgument,
            "SoftmaxCrossEntropy: label out of range");
    const float* row = lv.raw() + b * classes;
    const double peak = *std::max_element(row, row + classes);
    double z = 0.0;
    for (std::size_t k = 0; k < classes; ++k) z += std::exp(row[k] - peak);
    const double log_z = peak + std::log(z);
    for (std::size_t k = 0; k < classes; ++k) {
      (*probs)[b * classes + k] = static_cast<float>(std::exp(row[k] - log_z));
    }
    total += log_z - row[y];
  }
  const float scale = reduction == Reduction::kMean ? 1.0f / static_cast<float>(batch) : 1.0f;

  Tape* tape = logits.tape();
  return tape->Record(Tensor::Scalar(static_cast<float>(total * scale)), {logits},
                      [=, labels = std::move(label_copy)](const Tensor& grad,
                                                          std::span<Tensor* const> in) {
                        if (!in[0]) return;
                        const float g = grad[0] * scale;
                        float* dst = in[0]->raw();
                        for (std::size_t b = 0; b < batch; ++b) {
                          for (std::size_t k = 0; k < classes; ++k) {
                            const float onehot = static_cast<int>(k) == labels[b] ? 1.0f : 0.0f;
                            dst[b * classes + k] += g * ((*probs)[b * classes + k] - onehot);
                          }
                        }
                      });
}

}  // namespace pixreg::ops
