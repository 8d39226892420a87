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

// Little/big-endian byte stream helpers shared by the file formats.

#ifndef PIXREG_BINARY_IO_H_
#define PIXREG_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pixreg/errors.h"

namespace pixreg {

using Bytes = std::vector<std::uint8_t>;

class ByteWriter {
 public:
  void Magic(std::string_view four) {
    for (char c : four) bytes_.push_back(static_cast<std::uint8_t>(c));
  }
  void U8(std::uint8_t v) { bytes_.push_back(v); }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void U32BigEndian(std::uint32_t v) {
    for (int i = 3; i >= 0; --i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void F32(float v) { U32(std::bit_cast<std::uint32_t>(v)); }
  void F64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    U32(static_cast<std::uint32_t>(bits));
    U32(static_cast<std::uint32_t>(bits >> 32));
  }
  void F32s(std::span<const float> values) {
    for (float v : values) F32(v);
  }
  void Raw(std::span<const std::uint8_t> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }

  Bytes& bytes() { return bytes_; }
  Bytes Take() { return std::move(bytes_); }

 private:
  Bytes bytes_;
};

// Every read past the end throws kTruncated, tagged with `what`.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, std::string what)
      : data_(data), what_(std::move(what)) {}

  void Need(std::size_t n) const {
    if (data_.size() - pos_ < n) {
      Fail(ErrorCode::kTruncated, what_ + ": truncated at byte " + std::to_string(pos_));
    }
  }
  bool MagicIs(std::string_view four) {
    Need(4);
    const bool ok = std::memcmp(data_.data() + pos_, four.data(), 4) == 0;
    pos_ += 4;
    return ok;
  }
  std::uint8_t U8() {
    Need(1);
    return data_[pos_++];
  }
  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint32_t U32BigEndian() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_ + i];
    pos_ += 4;
    return v;
  }
  float F32() { return std::bit_cast<float>(U32()); }
  double F64() {
    Need(8);
    const std::uint64_t lo = U32();
    const std::uint64_t hi = U32();
    return std::bit_cast<double>(lo | (hi << 32));
  }
  void F32s(std::span<float> out) {
    Need(out.size() * 4);
    for (float& v : out) v = F32();
  }
  std::span<const std::uint8_t> Raw(std::size_t n) {
    Need(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  const std::string& what() const { return what_; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::string what_;
};

Bytes ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace pixreg

#endif  // PIXREG_BINARY_IO_H_
