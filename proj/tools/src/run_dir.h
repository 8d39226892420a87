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


#ifndef PIXREG_TOOLS_RUN_DIR_H_
#define PIXREG_TOOLS_RUN_DIR_H_

#include <chrono>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pixreg::cli {

// Output directory of one command. Every file goes through this class so
// nothing lands outside the root, and Finish() lists each file with its
// SHA-256 in manifest.json.
class RunDir {
 public:
  // Creates `root` if needed. Refuses a directory that already holds a
  // manifest. `argv` is the invocation without its --out option.
  RunDir(std::filesystem::path root, std::string command, std::vector<std::string> argv);

  const std::filesystem::path& root() const { return root_; }

  // root / relative, creating parent directories. Absolute paths and ".."
  // components are rejected.
  std::filesystem::path Path(std::string_view relative) const;

  void WriteText(std::string_view relative, std::string_view text);
  void WriteBytes(std::string_view relative, std::span<const std::uint8_t> bytes);
  // Registers a file something else already wrote under Path(relative).
  void AddArtifact(std::string_view relative);

  void AddInput(const std::filesystem::path& path);
  void SetConfigHash(std::string hash) { config_hash_ = std::move(hash); }
  void SetSeed(const std::string& name, std::uint64_t seed) { seeds_[name] = seed; }
  void AddTiming(const std::string& name, double seconds) { timings_[name] += seconds; }

  void Finish();

 private:
  std::filesystem::path root_;
  std::string command_;
  std::vector<std::string> argv_;
  std::vector<std::string> artifacts_;
  std::vector<std::filesystem::path> inputs_;
  std::string config_hash_;
  nlohmann::json seeds_ = nlohmann::json::object();
  std::map<std::string, double> timings_;
  std::chrono::steady_clock::time_point start_;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Files behind a dataset id ("idx:a,b", "cifar10:a,b", "stack:p").
std::vector<std::filesystem::path> DatasetFiles(std::string_view id);

}  // namespace pixreg::cli

#endif  // PIXREG_TOOLS_RUN_DIR_H_
