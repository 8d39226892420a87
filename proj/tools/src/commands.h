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


#ifndef PIXREG_TOOLS_COMMANDS_H_
#define PIXREG_TOOLS_COMMANDS_H_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "pixreg/attacks.h"
#include "pixreg/config.h"
#include "pixreg/trainer.h"
#include "run_dir.h"

namespace pixreg::cli {

struct Io {
  std::ostream& out;
  std::ostream& err;
};

// Applies "key=value" overrides on top of a config file.
ExperimentConfig LoadConfig(const std::string& path, const std::vector<std::string>& overrides);

struct TrainedRun {
  TrainData data;
  TrainResult result;
};

// Prepares data, trains, and writes <prefix>config.txt, model.pxnn,
// log.jsonl and summary.json into `run`.
TrainedRun TrainInto(RunDir& run, const std::string& prefix, const ExperimentConfig& config,
                     const Io& io);

LabeledImageSet LoadEvalSet(const std::string& id, bool grayscale, std::uint64_t limit);
void CheckModelInput(const TapNet& net, const LabeledImageSet& set);

struct TrainOptions {
  std::string config;
  std::vector<std::string> overrides;
};
int CmdTrain(const TrainOptions& o, RunDir& run, const Io& io);

struct AttackOptions {
  std::string model;
  std::string data;
  bool grayscale = false;
  std::uint64_t limit = 0;
  std::string attack = "gaussian";
  std::vector<double> eps = {0.0, 0.05, 0.1, 0.2, 0.3};
  double c = 1.0;
  std::string substitute;
  BoundaryOptions boundary;
  std::uint64_t images = 1000;
  std::uint64_t repeats = 5;
  std::uint64_t seed = 0;
};
int CmdAttack(const AttackOptions& o, RunDir& run, const Io& io);

struct SweepOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::vector<double> alphas;
  std::vector<double> ths;
  std::vector<std::uint64_t> seeds = {1};
  std::string attack = "gaussian";
  std::vector<double> eps = {0.0, 0.1, 0.2, 0.3};
  double eps_high = -1.0;  // < 0: 0.1 for noise, 0.02 for transfer
  double a0 = 0.9;
  double c = 1.0;
};
int CmdSweep(const SweepOptions& o, RunDir& run, const Io& io);

struct SpectrumOptions {
  std::string data;
  bool grayscale = false;
  std::uint64_t limit = 1000;
  std::string corruption = "gaussian_noise";
  double severity = 0.1;
  std::uint64_t seed = 0;
};
int CmdSpectrum(const SpectrumOptions& o, RunDir& run, const Io& io);

struct PerturbationOptions {
  std::string model;
  std::string data;
  bool grayscale = false;
  std::uint64_t images = 100;
  std::uint64_t steps = 2000;
  std::uint64_t seed = 0;
};
int CmdPerturbation(const PerturbationOptions& o, RunDir& run, const Io& io);

struct CorrelationOptions {
  std::string model;
  std::string data;
  bool grayscale = false;
  std::uint64_t images = 200;
  std::uint64_t seed = 0;
};
int CmdCorrelation(const CorrelationOptions& o, RunDir& run, const Io& io);

struct TradeoffOptions {
  std::string reg;
  std::string unreg;
  double eps_high = 0.1;
  double a0 = 0.9;
};
int CmdTradeoff(const TradeoffOptions& o, RunDir& run, const Io& io);

}  // namespace pixreg::cli

#endif  // PIXREG_TOOLS_COMMANDS_H_
