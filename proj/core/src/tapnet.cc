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

#include "pixreg/tapnet.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <regex>
#include <sstream>

#include "pixreg/errors.h"
#include "pixreg/layers.h"

namespace pixreg {
namespace {

std::string KindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv: return "conv";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kAvgPool: return "pool";
    case LayerKind::kLinear: return "fc";
  }
  return "?";
}

std::string LayerLabel(std::size_t index, const LayerSpec& spec) {
  return "layer " + std::to_string(index) + " (" + KindName(spec.kind) + ")";
}

std::vector<std::string> SplitCommas(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ' && c != '\t') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

int Architecture::num_classes() const {
  Require(!layers.empty() && layers.back().kind == LayerKind::kLinear,
          ErrorCode::kInvalidArgument, "architecture must end with an fc layer");
  return layers.back().out_features;
}

std::string Architecture::LayersToString() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    if (i) out << ',';
    switch (l.kind) {
      case LayerKind::kConv:
        out << "conv" << l.out_channels;
        if (l.kernel != 3 || l.stride != 1 || l.padding != 1) {
          out << 'k' << l.kernel << 's' << l.stride << 'p' << l.padding;
        }
        if (l.skip) out << "+skip";
        break;
      case LayerKind::kRelu: out << "relu"; break;
      case LayerKind::kAvgPool: out << "pool" << l.pool; break;
      case LayerKind::kLinear: out << "fc" << l.out_features; break;
    }
  }
  return out.str();
}

std::string Architecture::TapsToString() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < taps.size(); ++i) out << (i ? "," : "") << taps[i];
  return out.str();
}

Architecture Architecture::Parse(std::string_view layer_text, std::string_view tap_text,
                                 int in_channels, int in_height, int in_width) {
  static const std::regex kConv(R"(conv(\d+)(?:k(\d+))?(?:s(\d+))?(?:p(\d+))?(\+skip)?)");
  static const std::regex kPool(R"(pool(\d+))");
  static const std::regex kFc(R"(fc(\d+))");

  Architecture arch;
  arch.in_channels = in_channels;
  arch.in_height = in_height;
  arch.in_width = in_width;
  for (const std::string& token : SplitCommas(layer_text)) {
    std::smatch m;
    LayerSpec spec;
    if (std::regex_match(token, m, kConv)) {
      spec.kind = LayerKind::kConv;
      spec.out_channels = std::stoi(m[1]);
      spec.kernel = m[2].matched ? std::stoi(m[2]) : 3;
      spec.stride = m[3].matched ? std::stoi(m[3]) : 1;
      spec.padding = m[4].matched ? std::stoi(m[4]) : spec.kernel / 2;
      spec.skip = m[5].matched;
    } else if (token == "relu") {
      spec.kind = LayerKind::kRelu;
    } else if (std::regex_match(token, m, kPool)) {
      spec.kind = LayerKind::kAvgPool;
      spec.pool = std::stoi(m[1]);
    } else if (std::regex_match(token, m, kFc)) {
      spec.kind = LayerKind::kLinear;
      spec.out_features = std::stoi(m[1]);
    } else {
      Fail(ErrorCode::kInvalidArgument, "unknown layer token '" + token + "'");
    }
    arch.layers.push_back(spec);
  }

  if (tap_text == "auto") {
    for (std::size_t i = 1; i < arch.layers.size(); ++i) {
      if (arch.layers[i].kind == LayerKind::kRelu &&
          arch.layers[i - 1].kind == LayerKind::kConv) {
        arch.taps.push_back(static_cast<int>(i));
      }
    }
  } else {
    for (const std::string& token : SplitCommas(tap_text)) {
      try {
        arch.taps.push_back(std::stoi(token));
      } catch (const std::exception&) {
        Fail(ErrorCode::kInvalidArgument, "bad tap index '" + token + "'");
      }
    }
  }
  arch.Validate();
  return arch;
}

Architecture Architecture::DeskDefault(int in_channels, int in_height, int in_width,
                                       int num_classes) {
  return Parse("conv16,relu,conv32,relu,pool2,conv32,relu,conv64,relu,pool2,fc" +
                   std::to_string(num_classes),
               "auto", in_channels, in_height, in_width);
}

void Architecture::Validate() const {
  Require(in_channels > 0 && in_height > 0 && in_width > 0, ErrorCode::kInvalidArgument,
          "input geometry must be positive");
  Require(!layers.empty() && layers.back().kind == LayerKind::kLinear,
          ErrorCode::kInvalidArgument, "architecture must end with an fc layer");
  Require(!taps.empty(), ErrorCode::kInvalidArgument, "at least one tap layer is required");
  for (std::size_t i = 0; i < taps.size(); ++i) {
    Require(taps[i] >= 0 && static_cast<std::size_t>(taps[i]) < layers.size(),
            ErrorCode::kInvalidArgument, "tap index " + std::to_string(taps[i]) + " out of range");
    Require(i == 0 || taps[i] > taps[i - 1], ErrorCode::kInvalidArgument,
            "tap indices must be strictly increasing");
  }

  long c = in_channels, h = in_height, w = in_width;
  bool flat = false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    const std::string where = LayerLabel(i, l);
    switch (l.kind) {
      case LayerKind::kConv: {
        Require(!flat, ErrorCode::kShapeMismatch, where + ": conv after fc");
        Require(l.out_channels > 0 && l.kernel > 0 && l.stride > 0 && l.padding >= 0,
                ErrorCode::kInvalidArgument, where + ": bad conv parameters");
        Require(h + 2 * l.padding >= l.kernel && w + 2 * l.padding >= l.kernel,
                ErrorCode::kShapeMismatch, where + ": kernel larger than padded input");
        const long oh = (h + 2 * l.padding - l.kernel) / l.stride + 1;
        const long ow = (w + 2 * l.padding - l.kernel) / l.stride + 1;
        if (l.skip) {
          Require(oh == h && ow == w && l.out_channels == c, ErrorCode::kShapeMismatch,
                  where + ": identity skip needs matching input and output shape");
        }
        c = l.out_channels;
        h = oh;
        w = ow;
        break;
      }
      case LayerKind::kRelu: break;
      case LayerKind::kAvgPool:
        Require(!flat, ErrorCode::kShapeMismatch, where + ": pool after fc");
        Require(l.pool > 0 && h >= l.pool && w >= l.pool, ErrorCode::kShapeMismatch,
                where + ": pool window larger than input");
        h /= l.pool;
        w /= l.pool;
        break;
      case LayerKind::kLinear:
        Require(l.out_features > 0, ErrorCode::kInvalidArgument, where + ": bad fc size");
        flat = true;
        c = l.out_features;
        h = w = 1;
        break;
    }
  }
}

TapNet::TapNet(Architecture arch) : arch_(std::move(arch)) {
  arch_.Validate();
  long c = arch_.in_channels, h = arch_.in_height, w = arch_.in_width;
  weight_index_.assign(arch_.layers.size(), -1);
  for (std::size_t i = 0; i < arch_.layers.size(); ++i) {
    const LayerSpec& l = arch_.layers[i];
    const std::string prefix = "layer" + std::to_string(i);
    if (l.kind == LayerKind::kConv) {
      weight_index_[i] = static_cast<int>(params_.size());
      params_.push_back({prefix + ".weight",
                         Tensor({static_cast<std::size_t>(l.out_channels),
                                 static_cast<std::size_t>(c), static_cast<std::size_t>(l.kernel),
                                 static_cast<std::size_t>(l.kernel)})});
      params_.push_back({prefix + ".bias", Tensor({static_cast<std::size_t>(l.out_channels)})});
      h = (h + 2 * l.padding - l.kernel) / l.stride + 1;
      w = (w + 2 * l.padding - l.kernel) / l.stride + 1;
      c = l.out_channels;
    } else if (l.kind == LayerKind::kAvgPool) {
      h /= l.pool;
      w /= l.pool;
    } else if (l.kind == LayerKind::kLinear) {
      weight_index_[i] = static_cast<int>(params_.size());
      params_.push_back({prefix + ".weight",
                         Tensor({static_cast<std::size_t>(l.out_features),
                                 static_cast<std::size_t>(c * h * w)})});
      params_.push_back({prefix + ".bias", Tensor({static_cast<std::size_t>(l.out_features)})});
      c = l.out_features;
      h = w = 1;
    }
  }
}

TapNet TapNet::Zeros(const Architecture& arch) { return TapNet(arch); }

TapNet TapNet::Create(const Architecture& arch, std::uint64_t seed) {
  TapNet net(arch);
  std::mt19937_64 rng(seed);
  for (Parameter& p : net.params_) {
    if (p.value.rank() == 1) continue;  // biases stay zero
    const std::size_t fan_in = p.value.size() / p.value.dim(0);
    const float bound = std::sqrt(6.0f / static_cast<float>(fan_in));
    std::uniform_real_distribution<float> dist(-bound, bound);
    for (float& v : p.value.data()) v = dist(rng);
  }
  return net;
}

Parameter& TapNet::param(std::string_view name) {
  for (Parameter& p : params_) {
    if (p.name == name) return p;
  }
  Fail(ErrorCode::kInvalidArgument, "no parameter named '" + std::string(name) + "'");
}

const Parameter& TapNet::param(std::string_view name) const {
  return const_cast<TapNet*>(this)->param(name);
}

template <typename ParamFn>
TapOutputs TapNet::Run(Tape& tape, Var batch, ParamFn&& param_var) const {
  const Tensor& in = batch.value();
  const LayerSpec& first = arch_.layers.front();
  Require(in.rank() == 4 && in.dim(1) == static_cast<std::size_t>(arch_.in_channels) &&
              in.dim(2) == static_cast<std::size_t>(arch_.in_height) &&
              in.dim(3) == static_cast<std::size_t>(arch_.in_width),
          ErrorCode::kShapeMismatch,
          LayerLabel(0, first) + ": expected input (B, " + std::to_string(arch_.in_channels) +
              ", " + std::to_string(arch_.in_height) + ", " + std::to_string(arch_.in_width) +
              "), got " + ShapeToString(in.shape()));

  TapOutputs out;
  Var x = batch;
  std::size_t next_tap = 0;
  for (std::size_t i = 0; i < arch_.layers.size(); ++i) {
    const LayerSpec& l = arch_.layers[i];
    try {
      switch (l.kind) {
        case LayerKind::kConv: {
          const int wi = weight_index_[i];
          Var y = ops::Conv2d(x, param_var(wi), param_var(wi + 1), l.stride, l.padding);
          x = l.skip ? ops::Add(y, x) : y;
          break;
        }
        case LayerKind::kRelu: x = ops::Relu(x); break;
        case LayerKind::kAvgPool: x = ops::AvgPool(x, l.pool); break;
        case LayerKind::kLinear: {
          const int wi = weight_index_[i];
          x = ops::Linear(x, param_var(wi), param_var(wi + 1));
          break;
        }
      }
    } catch (const Error& e) {
      throw Error(e.code(), LayerLabel(i, l) + ": " + e.what());
    }
    if (next_tap < arch_.taps.size() && arch_.taps[next_tap] == static_cast<int>(i)) {
      out.taps.push_back(x);
      ++next_tap;
    }
  }
  out.logits = x;
  (void)tape;
  return out;
}

TapOutputs TapNet::Forward(Tape& tape, Var batch) {
  if (tape.recording()) {
    return Run(tape, batch, [&](int index) { return tape.Bind(params_[index]); });
  }
  return Run(tape, batch, [&](int index) { return tape.Constant(params_[index].value); });
}

TapOutputs TapNet::ForwardFrozen(Tape& tape, Var batch) const {
  return Run(tape, batch, [&](int index) { return tape.Constant(params_[index].value); });
}

ForwardResult TapNet::Forward(const Tensor& batch) const {
  Tape tape(Tape::Mode::kInference);
  Var x = tape.Constant(batch);
  TapOutputs vars = Run(tape, x, [&](int index) { return tape.Constant(params_[index].value); });
  ForwardResult result;
  result.logits = vars.logits.value();
  for (const Var& t : vars.taps) result.taps.push_back(t.value());
  return result;
}

std::vector<int> Argmax(const Tensor& logits) {
  const std::size_t batch = logits.dim(0);
  const std::size_t classes = logits.size() / batch;
  std::vector<int> out(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const float* row = logits.raw() + b * classes;
    out[b] = static_cast<int>(std::max_element(row, row + classes) - row);
  }
  return out;
}

std::vector<int> TapNet::Predict(const Tensor& batch) const {
  return Argmax(Forward(batch).logits);
}

}  // namespace pixreg
