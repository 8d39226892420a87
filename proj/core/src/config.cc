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


#include "pixreg/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pixreg/errors.h"
#include "pixreg/hash.h"

namespace pixreg {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double ParseDouble(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    Fail(ErrorCode::kConfig, std::string(key) + ": '" + std::string(v) + "' is not a number");
  }
  return out;
}

std::uint64_t ParseUnsigned(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    Fail(ErrorCode::kConfig,
         std::string(key) + ": '" + std::string(v) + "' is not a non-negative integer");
  }
  return out;
}

bool ParseBool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  Fail(ErrorCode::kConfig, std::string(key) + ": expected true or false, got '" + std::string(v) + "'");
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

void ExperimentConfig::Set(std::string_view key, std::string_view value) {
  const std::string v(value);
  if (key == "train_data") train_data = v;
  else if (key == "test_data") test_data = v;
  else if (key == "reg_data") reg_data = v;
  else if (key == "grayscale") grayscale = ParseBool(key, value);
  else if (key == "train_limit") train_limit = ParseUnsigned(key, value);
  else if (key == "test_limit") test_limit = ParseUnsigned(key, value);
  else if (key == "alpha") alpha = ParseDouble(key, value);
  else if (key == "th") th = ParseDouble(key, value);
  else if (key == "th2") th2 = ParseDouble(key, value);
  else if (key == "target_mode") {
    try {
      target_mode = ParseTargetMode(value);
    } catch (const Error& e) {
      Fail(ErrorCode::kConfig, std::string("target_mode: ") + e.what());
    }
  }
  else if (key == "eps_clamp") eps_clamp = ParseDouble(key, value);
  else if (key == "epochs") epochs = ParseUnsigned(key, value);
  else if (key == "batch_size") batch_size = ParseUnsigned(key, value);
  else if (key == "pair_batch") pair_batch = ParseUnsigned(key, value);
  else if (key == "num_reg_images") num_reg_images = ParseUnsigned(key, value);
  else if (key == "lr") lr = ParseDouble(key, value);
  else if (key == "momentum") momentum = ParseDouble(key, value);
  else if (key == "decay_at") decay_at = ParseDouble(key, value);
  else if (key == "seed") seed = ParseUnsigned(key, value);
  else if (key == "arch") arch = v;
  else if (key == "taps") taps = v;
  else if (key == "target_file") target_file = v;
  else if (key == "freeze_pairs") freeze_pairs = ParseBool(key, value);
  else if (key == "log_steps") log_steps = ParseUnsigned(key, value);
  else if (key == "output_dir") output_dir = v;
  else Fail(ErrorCode::kConfig, "unknown key '" + std::string(key) + "'");
}

void ExperimentConfig::Validate() const {
  auto check = [](bool ok, const std::string& msg) { Require(ok, ErrorCode::kConfig, msg); };
  check(!train_data.empty(), "train_data is required");
  check(!test_data.empty(), "test_data is required");
  check(alpha >= 0.0, "alpha must be >= 0");
  if (target_mode != TargetMode::kPixel) check(th > 0.0 && th < 1.0, "th must lie in (0, 1)");
  if (target_mode == TargetMode::kDouble) check(th2 > 0.0 && th2 < th, "th2 must lie in (0, th)");
  check(eps_clamp > 0.0 && eps_clamp < 0.5, "eps_clamp must lie in (0, 0.5)");
  check(epochs >= 1, "epochs must be >= 1");
  check(batch_size >= 1, "batch_size must be >= 1");
  check(pair_batch >= 1 || alpha == 0.0, "pair_batch must be >= 1 when alpha > 0");
  check(num_reg_images >= 2, "num_reg_images must be >= 2");
  check(lr > 0.0, "lr must be > 0");
  check(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0, 1)");
  check(decay_at > 0.0 && decay_at <= 1.0, "decay_at must lie in (0, 1]");
  check(!arch.empty(), "arch must not be empty");
  check(!taps.empty(), "taps must not be empty");
}

std::string ExperimentConfig::CanonicalText(bool with_output_dir) const {
  std::ostringstream out;
  auto line = [&](std::string_view key, const std::string& value) {
    out << key << " = " << value << "\n";
  };
  line("alpha", FormatDouble(alpha));
  line("arch", arch);
  line("batch_size", std::to_string(batch_size));
  line("decay_at", FormatDouble(decay_at));
  line("epochs", std::to_string(epochs));
  line("eps_clamp", FormatDouble(eps_clamp));
  line("freeze_pairs", freeze_pairs ? "true" : "false");
  line("grayscale", grayscale ? "true" : "false");
  line("log_steps", std::to_string(log_steps));
  line("lr", FormatDouble(lr));
  line("momentum", FormatDouble(momentum));
  line("num_reg_images", std::to_string(num_reg_images));
  if (with_output_dir) line("output_dir", output_dir);
  line("pair_batch", std::to_string(pair_batch));
  line("reg_data", reg_data);
  line("seed", std::to_string(seed));
  line("taps", taps);
  line("target_file", target_file);
  line("target_mode", std::string(TargetModeName(target_mode)));
  line("test_data", test_data);
  line("test_limit", std::to_string(test_limit));
  line("th", FormatDouble(th));
  line("th2", FormatDouble(th2));
  line("train_data", train_data);
  line("train_limit", std::to_string(train_limit));
  return out.str();
}

std::string ExperimentConfig::Hash() const { return Sha256Hex(CanonicalText(false)); }

ExperimentConfig ExperimentConfig::Parse(std::string_view text) {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    try {
      Require(eq != std::string_view::npos, ErrorCode::kConfig, "expected 'key = value'");
      const std::string_view key = Trim(line.substr(0, eq));
      Require(!key.empty(), ErrorCode::kConfig, "empty key");
      cfg.Set(key, Trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      Fail(ErrorCode::kConfig, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  cfg.Validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::LoadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

}  // namespace pixreg
