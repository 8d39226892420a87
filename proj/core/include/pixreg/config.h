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


#ifndef PIXREG_CONFIG_H_
#define PIXREG_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "pixreg/target.h"

namespace pixreg {

// Everything needed to reproduce one training run. Text form is flat
// `key = value` lines; '#' starts a comment; unknown keys are rejected.
//
//   train_data, test_data   dataset ids (see LoadDataset); required
//   reg_data                regularization dataset id (default: train_data)
//   grayscale               convert 3-channel inputs to luma (default false)
//   train_limit, test_limit use only the first n images, 0 = all
//   alpha                   regularization strength >= 0
//   th, th2                 target thresholds in (0, 1); th2 for target_mode = double
//   target_mode             threshold | double | minus | plus | low | high | full | pixel
//   eps_clamp               target clamp, (0, 0.5)
//   epochs, batch_size      classification schedule
//   pair_batch              regularization pairs per step (0 only with alpha = 0)
//   num_reg_images          N regularization images
//   lr, momentum, decay_at  SGD; lr drops x0.1 after fraction decay_at of all steps
//   seed                    run seed
//   arch, taps              "default" or a layer string (see Architecture::Parse);
//                           taps "auto" or comma-separated layer indices
//   target_file             precomputed similarity target (optional)
//   freeze_pairs            sample the regularization pairs once and reuse them
//   log_steps               write a step record every n steps, 0 = never
//   output_dir              run directory (not part of the hash)
struct ExperimentConfig {
  std::string train_data;
  std::string test_data;
  std::string reg_data;
  bool grayscale = false;
  std::uint64_t train_limit = 0;
  std::uint64_t test_limit = 0;

  double alpha = 0.0;
  double th = 0.2;
  double th2 = 0.0;
  TargetMode target_mode = TargetMode::kThreshold;
  double eps_clamp = 1e-6;

  std::uint64_t epochs = 5;
  std::uint64_t batch_size = 64;
  std::uint64_t pair_batch = 16;
  std::uint64_t num_reg_images = 1000;
  double lr = 0.01;
  double momentum = 0.9;
  double decay_at = 0.75;
  std::uint64_t seed = 1;

  std::string arch = "default";
  std::string taps = "auto";
  std::string target_file;
  bool freeze_pairs = false;
  std::uint64_t log_steps = 0;
  std::string output_dir;

  // Sets one key from its text value; throws kConfig naming the key.
  void Set(std::string_view key, std::string_view value);
  // Range checks across all fields; throws kConfig.
  void Validate() const;

  TargetParams target_params() const { return {target_mode, th, th2, eps_clamp}; }
  const std::string& regularization_data() const { return reg_data.empty() ? train_data : reg_data; }

  // Every key in a fixed order, one `key = value` per line.
  std::string CanonicalText(bool with_output_dir = true) const;
  // SHA-256 of CanonicalText(false).
  std::string Hash() const;

  // Parse errors carry "line <n>: ...".
  static ExperimentConfig Parse(std::string_view text);
  static ExperimentConfig LoadFile(const std::filesystem::path& path);
};

}  // namespace pixreg

#endif  // PIXREG_CONFIG_H_
