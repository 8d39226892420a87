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


#include "cli.h"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>

#include "commands.h"
#include "pixreg/errors.h"
#include "pixreg/hash.h"
#include "pixreg/version.h"

namespace pixreg::cli {
namespace {

namespace fs = std::filesystem;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidArgument:
      return kExitUsage;
    case ErrorCode::kNumeric:
      return kExitNumeric;
    default:
      return kExitData;
  }
}

// The invocation minus its --out option, as recorded in the manifest.
std::vector<std::string> WithoutOut(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out") {
      ++i;
      continue;
    }
    if (args[i].rfind("--out=", 0) == 0) continue;
    out.push_back(args[i]);
  }
  return out;
}

class ScopedCwd {
 public:
  explicit ScopedCwd(const fs::path& dir) : saved_(fs::current_path()) { fs::current_path(dir); }
  ~ScopedCwd() {
    std::error_code ec;
    fs::current_path(saved_, ec);
  }
  ScopedCwd(const ScopedCwd&) = delete;
  ScopedCwd& operator=(const ScopedCwd&) = delete;

 private:
  fs::path saved_;
};

nlohmann::json ReadManifest(const fs::path& path) {
  std::ifstream in(path);
  Require(static_cast<bool>(in), ErrorCode::kIo, "cannot open '" + path.string() + "'");
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
  Require(m.value("format", "") == "pixreg-run/1", ErrorCode::kFormat,
          path.string() + ": not a pixreg run manifest");
  return m;
}

int CmdSimTarget(const TrainOptions& o, RunDir& run, const Io& io) {
  ExperimentConfig config = LoadConfig(o.config, o.overrides);
  config.target_file.clear();
  run.AddInput(o.config);
  for (const std::string& id : {config.train_data, config.test_data, config.reg_data}) {
    for (const auto& path : DatasetFiles(id)) run.AddInput(path);
  }
  run.SetConfigHash(config.Hash());
  run.SetSeed("seed", config.seed);
  Stopwatch watch;
  const TrainData data = PrepareData(config);
  run.AddTiming("build", watch.Seconds());
  run.WriteBytes("target.pxst", data.target.Serialize());
  nlohmann::json summary = {{"images", data.target.size()},
                            {"pairs", data.target.pair_count()},
                            {"masked", data.target.CountMasked()},
                            {"mode", std::string(TargetModeName(config.target_mode))},
                            {"th", config.th},
                            {"th2", config.th2},
                            {"eps_clamp", config.eps_clamp},
                            {"regularization_data", data.reg.Provenance()}};
  run.WriteText("target.json", summary.dump(2) + "\n");
  run.Finish();
  io.out << "pairs " << data.target.pair_count() << " masked " << data.target.CountMasked() << "\n";
  return 0;
}

int CmdDatasetInfo(const std::string& id, bool grayscale, const Io& io) {
  const LabeledImageSet set = LoadEvalSet(id, grayscale, 0);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(std::max(set.num_classes, 1)), 0);
  for (int label : set.labels) ++counts[static_cast<std::size_t>(label)];
  double lo = 1.0, hi = 0.0, sum = 0.0;
  for (float v : set.images.data()) {
    lo = std::min<double>(lo, v);
    hi = std::max<double>(hi, v);
    sum += v;
  }
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(set.images.raw());
  nlohmann::json j = {{"id", id},
                      {"provenance", set.Provenance()},
                      {"images", set.size()},
                      {"channels", set.channels()},
                      {"height", set.height()},
                      {"width", set.width()},
                      {"num_classes", set.num_classes},
                      {"label_counts", counts},
                      {"pixel_min", lo},
                      {"pixel_max", hi},
                      {"pixel_mean", sum / static_cast<double>(set.images.size())},
                      {"pixels_sha256", Sha256Hex(std::span(bytes, set.images.size() * sizeof(float)))}};
  io.out << j.dump(2) << "\n";
  return 0;
}

int CmdReplay(const std::string& manifest_path, const std::string& out_dir, const Io& io) {
  const nlohmann::json recorded = ReadManifest(manifest_path);
  for (const auto& input : recorded.at("inputs")) {
    const std::string path = input.at("path");
    Require(fs::exists(path), ErrorCode::kIo, "input '" + path + "' is missing");
    Require(Sha256File(path) == input.at("sha256").get<std::string>(), ErrorCode::kFormat,
            "input '" + path + "' changed since the recorded run");
  }
  std::vector<std::string> args = recorded.at("argv").get<std::vector<std::string>>();
  Require(!out_dir.empty(), ErrorCode::kConfig, "replay needs --out");
  args.push_back("--out");
  args.push_back(fs::absolute(out_dir).string());

  int code = 0;
  {
    ScopedCwd cwd(recorded.at("cwd").get<std::string>());
    code = RunCli(args, io.out, io.err);
  }
  if (code != 0) return code;

  const nlohmann::json fresh = ReadManifest(fs::path(out_dir) / "manifest.json");
  std::map<std::string, std::string> now;
  for (const auto& a : fresh.at("artifacts")) now[a.at("path")] = a.at("sha256");
  std::size_t differ = 0;
  for (const auto& a : recorded.at("artifacts")) {
    const std::string path = a.at("path");
    const auto it = now.find(path);
    const bool same = it != now.end() && it->second == a.at("sha256").get<std::string>();
    io.out << (same ? "same " : "DIFF ") << path << "\n";
    differ += same ? 0 : 1;
    if (it != now.end()) now.erase(it);
  }
  for (const auto& [path, sha] : now) {
    io.out << "EXTRA " << path << "\n";
    ++differ;
  }
  if (differ > 0) {
    io.err << "pixreg: error: replay differs in " << differ << " artifact(s)\n";
    return kExitData;
  }
  io.out << "replay identical\n";
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const Io io{out, err};
  CLI::App app{"Pixel-similarity regularization experiments", "pixreg"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  std::string out_dir;

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a model from a config file");
  train_cmd->add_option("--config", train.config, "key = value config file")->required();
  train_cmd->add_option("--set", train.overrides, "Override a config key (key=value)");
  train_cmd->add_option("--out", out_dir, "Run directory (default: output_dir from the config)");

  AttackOptions attack;
  std::string eps_text;
  auto* attack_cmd = app.add_subcommand("attack", "Attack a trained model");
  attack_cmd->add_option("--model", attack.model)->required();
  attack_cmd->add_option("--data", attack.data, "Dataset id, e.g. idx:images,labels")->required();
  attack_cmd->add_flag("--grayscale", attack.grayscale);
  attack_cmd->add_option("--limit", attack.limit, "Use the first n images (0 = all)");
  attack_cmd->add_option("--attack", attack.attack)
      ->check(CLI::IsMember({"gaussian", "uniform", "salt_pepper", "fgsm", "transfer", "boundary"}));
  attack_cmd->add_option("--eps", attack.eps, "Comma-separated eps grid")->delimiter(',');
  attack_cmd->add_option("--c", attack.c, "salt_pepper rate multiplier");
  attack_cmd->add_option("--substitute", attack.substitute, "Substitute model for transfer");
  attack_cmd->add_option("--steps", attack.boundary.steps, "Boundary attack steps");
  attack_cmd->add_option("--images", attack.images, "Boundary attack images");
  attack_cmd->add_option("--repeats", attack.repeats, "Boundary attack repeats");
  attack_cmd->add_option("--seed", attack.seed);
  attack_cmd->add_option("--out", out_dir)->required();

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Trade-off plane over (alpha, th)");
  sweep_cmd->add_option("--config", sweep.config)->required();
  sweep_cmd->add_option("--set", sweep.overrides);
  sweep_cmd->add_option("--alpha", sweep.alphas)->delimiter(',')->required()->check(CLI::Number);
  sweep_cmd->add_option("--th", sweep.ths)->delimiter(',')->required()->check(CLI::Number);
  sweep_cmd->add_option("--seeds", sweep.seeds)->delimiter(',');
  sweep_cmd->add_option("--attack", sweep.attack);
  sweep_cmd->add_option("--eps", sweep.eps)->delimiter(',');
  sweep_cmd->add_option("--eps-high", sweep.eps_high);
  sweep_cmd->add_option("--a0", sweep.a0);
  sweep_cmd->add_option("--c", sweep.c);
  sweep_cmd->add_option("--out", out_dir)->required();

  auto* analyze_cmd = app.add_subcommand("analyze", "Fourier, correlation and trade-off analyses");
  analyze_cmd->require_subcommand(1);
  SpectrumOptions spectrum;
  auto* spectrum_cmd = analyze_cmd->add_subcommand("spectrum", "Expected corruption spectrum");
  spectrum_cmd->add_option("--data", spectrum.data)->required();
  spectrum_cmd->add_flag("--grayscale", spectrum.grayscale);
  spectrum_cmd->add_option("--limit", spectrum.limit);
  spectrum_cmd->add_option("--corruption", spectrum.corruption);
  spectrum_cmd->add_option("--severity", spectrum.severity);
  spectrum_cmd->add_option("--seed", spectrum.seed);
  spectrum_cmd->add_option("--out", out_dir)->required();
  PerturbationOptions perturbation;
  auto* perturbation_cmd =
      analyze_cmd->add_subcommand("perturbation", "Power spectrum of boundary-attack perturbations");
  perturbation_cmd->add_option("--model", perturbation.model)->required();
  perturbation_cmd->add_option("--data", perturbation.data)->required();
  perturbation_cmd->add_flag("--grayscale", perturbation.grayscale);
  perturbation_cmd->add_option("--images", perturbation.images);
  perturbation_cmd->add_option("--steps", perturbation.steps);
  perturbation_cmd->add_option("--seed", perturbation.seed);
  perturbation_cmd->add_option("--out", out_dir)->required();
  CorrelationOptions correlation;
  auto* correlation_cmd =
      analyze_cmd->add_subcommand("correlation", "Pixel vs layer similarity correlation");
  correlation_cmd->add_option("--model", correlation.model)->required();
  correlation_cmd->add_option("--data", correlation.data)->required();
  correlation_cmd->add_flag("--grayscale", correlation.grayscale);
  correlation_cmd->add_option("--images", correlation.images);
  correlation_cmd->add_option("--seed", correlation.seed);
  correlation_cmd->add_option("--out", out_dir)->required();
  TradeoffOptions tradeoff;
  auto* tradeoff_cmd = analyze_cmd->add_subcommand("tradeoff", "Trade-off point from two reports");
  tradeoff_cmd->add_option("--reg", tradeoff.reg)->required();
  tradeoff_cmd->add_option("--unreg", tradeoff.unreg)->required();
  tradeoff_cmd->add_option("--eps-high", tradeoff.eps_high);
  tradeoff_cmd->add_option("--a0", tradeoff.a0);
  tradeoff_cmd->add_option("--out", out_dir)->required();

  TrainOptions sim_target;
  auto* sim_target_cmd =
      app.add_subcommand("sim-target", "Precompute the similarity target a config selects");
  sim_target_cmd->add_option("--config", sim_target.config)->required();
  sim_target_cmd->add_option("--set", sim_target.overrides);
  sim_target_cmd->add_option("--out", out_dir)->required();

  std::string info_data;
  bool info_grayscale = false;
  auto* info_cmd = app.add_subcommand("dataset-info", "Print a dataset summary as JSON");
  info_cmd->add_option("--data", info_data)->required();
  info_cmd->add_flag("--grayscale", info_grayscale);

  std::string manifest;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a recorded command and compare outputs");
  replay_cmd->add_option("--manifest", manifest)->required();
  replay_cmd->add_option("--out", out_dir)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*info_cmd) return CmdDatasetInfo(info_data, info_grayscale, io);
    if (*replay_cmd) return CmdReplay(manifest, out_dir, io);

    const std::vector<std::string> argv = WithoutOut(args);
    if (*train_cmd) {
      if (out_dir.empty()) out_dir = LoadConfig(train.config, train.overrides).output_dir;
      RunDir run(out_dir, "train", argv);
      return CmdTrain(train, run, io);
    }
    if (*attack_cmd) {
      RunDir run(out_dir, "attack", argv);
      return CmdAttack(attack, run, io);
    }
    if (*sweep_cmd) {
      RunDir run(out_dir, "sweep", argv);
      return CmdSweep(sweep, run, io);
    }
    if (*sim_target_cmd) {
      RunDir run(out_dir, "sim-target", argv);
      return CmdSimTarget(sim_target, run, io);
    }
    if (*spectrum_cmd) {
      RunDir run(out_dir, "analyze spectrum", argv);
      return CmdSpectrum(spectrum, run, io);
    }
    if (*perturbation_cmd) {
      RunDir run(out_dir, "analyze perturbation", argv);
      return CmdPerturbation(perturbation, run, io);
    }
    if (*correlation_cmd) {
      RunDir run(out_dir, "analyze correlation", argv);
      return CmdCorrelation(correlation, run, io);
    }
    if (*tradeoff_cmd) {
      RunDir run(out_dir, "analyze tradeoff", argv);
      return CmdTradeoff(tradeoff, run, io);
    }
  } catch (const Error& e) {
    err << "pixreg: error [" << ErrorCodeName(e.code()) << "]: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    err << "pixreg: error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace pixreg::cli
