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


#include "run_dir.h"

#include <algorithm>
#include <fstream>

#include "pixreg/errors.h"
#include "pixreg/hash.h"
#include "pixreg/model_io.h"
#include "pixreg/version.h"

namespace pixreg::cli {

namespace fs = std::filesystem;

RunDir::RunDir(fs::path root, std::string command, std::vector<std::string> argv)
    : root_(std::move(root)),
      command_(std::move(command)),
      argv_(std::move(argv)),
      start_(std::chrono::steady_clock::now()) {
  Require(!root_.empty(), ErrorCode::kConfig, "no output directory given (--out)");
  std::error_code ec;
  fs::create_directories(root_, ec);
  Require(!ec && fs::is_directory(root_), ErrorCode::kIo,
          "cannot create output directory '" + root_.string() + "'");
  Require(!fs::exists(root_ / "manifest.json"), ErrorCode::kConfig,
          "'" + root_.string() + "' already holds a run; choose a new --out");
}

fs::path RunDir::Path(std::string_view relative) const {
  const fs::path rel(relative);
  Require(!rel.empty() && rel.is_relative(), ErrorCode::kInvalidArgument,
          "run file names must be relative");
  for (const fs::path& part : rel) {
    Require(part != "..", ErrorCode::kInvalidArgument, "run file names may not contain '..'");
  }
  const fs::path full = root_ / rel;
  fs::create_directories(full.parent_path());
  return full;
}

void RunDir::WriteText(std::string_view relative, std::string_view text) {
  const fs::path path = Path(relative);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  Require(static_cast<bool>(out), ErrorCode::kIo, "write failed for '" + path.string() + "'");
  AddArtifact(relative);
}

void RunDir::WriteBytes(std::string_view relative, std::span<const std::uint8_t> bytes) {
  WriteFileBytes(Path(relative), bytes);
  AddArtifact(relative);
}

void RunDir::AddArtifact(std::string_view relative) {
  const std::string name(relative);
  Require(fs::is_regular_file(root_ / name), ErrorCode::kIo, "artifact '" + name + "' was not written");
  if (std::find(artifacts_.begin(), artifacts_.end(), name) == artifacts_.end()) {
    artifacts_.push_back(name);
  }
}

void RunDir::AddInput(const fs::path& path) {
  const fs::path abs = fs::absolute(path).lexically_normal();
  if (std::find(inputs_.begin(), inputs_.end(), abs) == inputs_.end()) inputs_.push_back(abs);
}

void RunDir::Finish() {
  nlohmann::json m;
  m["format"] = "pixreg-run/1";
  m["command"] = command_;
  m["argv"] = argv_;
  m["cwd"] = fs::current_path().string();
  if (!config_hash_.empty()) m["config_hash"] = config_hash_;
  m["seeds"] = seeds_;
  nlohmann::json inputs = nlohmann::json::array();
  for (const fs::path& p : inputs_) inputs.push_back({{"path", p.string()}, {"sha256", Sha256File(p)}});
  m["inputs"] = inputs;
  nlohmann::json artifacts = nlohmann::json::array();
  for (const std::string& a : artifacts_) {
    const fs::path p = root_ / a;
    artifacts.push_back({{"path", a}, {"bytes", fs::file_size(p)}, {"sha256", Sha256File(p)}});
  }
  m["artifacts"] = artifacts;
  nlohmann::json timings = nlohmann::json::object();
  for (const auto& [name, seconds] : timings_) timings[name] = seconds;
  timings["total"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  m["timings_s"] = timings;
  const std::string version(kVersion);
  m["versions"] = {{"pixreg", version},
                   {"modules",
                    {{"nn_core", version},
                     {"simreg", version},
                     {"trainer", version},
                     {"attacks", version},
                     {"analysis", version},
                     {"datasets", version},
                     {"cli", version}}},
                   {"model_format", kModelFormatVersion},
                   {"target_format", 1},
                   {"stack_format", 1}};
  const std::string text = m.dump(2) + "\n";
  std::ofstream out(root_ / "manifest.json", std::ios::binary | std::ios::trunc);
  out << text;
  Require(static_cast<bool>(out), ErrorCode::kIo, "cannot write manifest.json");
}

std::vector<fs::path> DatasetFiles(std::string_view id) {
  const std::size_t colon = id.find(':');
  if (colon == std::string_view::npos) return {};
  std::vector<fs::path> out;
  std::string_view rest = id.substr(colon + 1);
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    out.emplace_back(std::string(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace pixreg::cli
