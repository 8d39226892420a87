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

#include "pixreg/model_io.h"

#include <fstream>
#include <iterator>

namespace pixreg {

Bytes ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void WriteFileBytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

Bytes SaveModel(const TapNet& net, std::span<const float> mixer_logits) {
  const Architecture& arch = net.arch();
  ByteWriter w;
  w.Magic("PXNN");
  w.U32(kModelFormatVersion);
  w.U32(static_cast<std::uint32_t>(arch.in_channels));
  w.U32(static_cast<std::uint32_t>(arch.in_height));
  w.U32(static_cast<std::uint32_t>(arch.in_width));
  w.U32(static_cast<std::uint32_t>(arch.layers.size()));
  for (const LayerSpec& l : arch.layers) {
    w.U8(static_cast<std::uint8_t>(l.kind));
    w.U32(static_cast<std::uint32_t>(l.out_channels));
    w.U32(static_cast<std::uint32_t>(l.kernel));
    w.U32(static_cast<std::uint32_t>(l.stride));
    w.U32(static_cast<std::uint32_t>(l.padding));
    w.U32(l.skip ? 1u : 0u);
    w.U32(static_cast<std::uint32_t>(l.pool));
    w.U32(static_cast<std::uint32_t>(l.out_features));
  }
  w.U32(static_cast<std::uint32_t>(arch.taps.size()));
  for (int t : arch.taps) w.U32(static_cast<std::uint32_t>(t));
  w.U32(static_cast<std::uint32_t>(net.params().size()));
  for (const Parameter& p : net.params()) {
    w.U32(static_cast<std::uint32_t>(p.value.rank()));
    for (std::size_t d : p.value.shape()) w.U32(static_cast<std::uint32_t>(d));
    w.F32s(p.value.data());
  }
  w.U32(static_cast<std::uint32_t>(mixer_logits.size()));
  w.F32s(mixer_logits);
  return w.Take();
}

LoadedModel LoadModel(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "model");
  if (!r.MagicIs("PXNN")) Fail(ErrorCode::kBadMagic, "model: bad magic");
  const std::uint32_t version = r.U32();
  if (version != kModelFormatVersion) {
    Fail(ErrorCode::kBadVersion, "model: unsupported format version " + std::to_string(version));
  }
  Architecture arch;
  arch.in_channels = static_cast<int>(r.U32());
  arch.in_height = static_cast<int>(r.U32());
  arch.in_width = static_cast<int>(r.U32());
  const std::uint32_t layer_count = r.U32();
  r.Need(static_cast<std::size_t>(layer_count) * 29);
  for (std::uint32_t i = 0; i < layer_count; ++i) {
    LayerSpec l;
    const std::uint8_t kind = r.U8();
    if (kind < 1 || kind > 4) Fail(ErrorCode::kFormat, "model: unknown layer kind");
    l.kind = static_cast<LayerKind>(kind);
    l.out_channels = static_cast<int>(r.U32());
    l.kernel = static_cast<int>(r.U32());
    l.stride = static_cast<int>(r.U32());
    l.padding = static_cast<int>(r.U32());
    l.skip = r.U32() != 0;
    l.pool = static_cast<int>(r.U32());
    l.out_features = static_cast<int>(r.U32());
    arch.layers.push_back(l);
  }
  const std::uint32_t tap_count = r.U32();
  r.Need(static_cast<std::size_t>(tap_count) * 4);
  for (std::uint32_t i = 0; i < tap_count; ++i) arch.taps.push_back(static_cast<int>(r.U32()));

  TapNet net = [&] {
    try {
      return TapNet::Zeros(arch);
    } catch (const Error& e) {
      throw Error(ErrorCode::kFormat, std::string("model: invalid architecture: ") + e.what());
    }
  }();
  const std::uint32_t param_count = r.U32();
  if (param_count != net.params().size()) {
    Fail(ErrorCode::kFormat, "model: parameter count does not match architecture");
  }
  for (Parameter& p : net.params()) {
    const std::uint32_t rank = r.U32();
    Shape shape(rank);
    for (auto& d : shape) d = r.U32();
    if (shape != p.value.shape()) {
      Fail(ErrorCode::kFormat, "model: shape mismatch for '" + p.name + "'");
    }
    r.F32s(p.value.data());
  }
  LoadedModel out{std::move(net), {}};
  const std::uint32_t mixer_count = r.U32();
  out.mixer_logits.resize(mixer_count);
  r.F32s(out.mixer_logits);
  if (r.remaining() != 0) Fail(ErrorCode::kFormat, "model: trailing bytes after mixer block");
  return out;
}

void SaveModelFile(const std::filesystem::path& path, const TapNet& net,
                   std::span<const float> mixer_logits) {
  WriteFileBytes(path, SaveModel(net, mixer_logits));
}

LoadedModel LoadModelFile(const std::filesystem::path& path) {
  return LoadModel(ReadFileBytes(path));
}

}  // namespace pixreg
