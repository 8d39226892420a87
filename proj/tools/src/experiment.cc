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


#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "commands.h"
#include "pixreg/analysis.h"
#include "pixreg/errors.h"
#include "pixreg/model_io.h"
#include "pixreg/rng.h"

namespace pixreg::cli {
namespace {

nlohmann::json EpochSummary(const EpochRecord& e) {
  return {{"epoch", e.epoch},
          {"steps", e.steps},
          {"train_accuracy", e.train_accuracy},
          {"test_accuracy", e.test_accuracy},
          {"task_loss", e.task_loss},
          {"sim_loss", e.sim_loss},
          {"gamma", e.gamma}};
}

nlohmann::json TargetSummary(const SimilarityTarget& t) {
  std::uint64_t positive = 0, negative = 0, zero = 0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (!t.masked(i, j)) continue;
      const float v = t.value(i, j);
      v > 0.0f ? ++positive : (v < 0.0f ? ++negative : ++zero);
    }
  }
  return {{"images", t.size()},   {"pairs", t.pair_count()}, {"masked", t.CountMasked()},
          {"positive", positive}, {"negative", negative},    {"zero", zero},
          {"mode", std::string(TargetModeName(t.params().mode))}};
}

std::string FormatGamma(std::span<const double> gamma) {
  std::ostringstream s;
  s << std::setprecision(6);
  for (std::size_t i = 0; i < gamma.size(); ++i) s << (i ? " " : "") << gamma[i];
  return s.str();
}

std::string CellName(double alpha, double th, std::uint64_t seed) {
  std::ostringstream s;
  s << "cells/a" << alpha << "_th" << th << "_s" << seed << "/";
  return s.str();
}

// Accuracy curve of `net` under the named sweep attack.
std::vector<AccuracyPoint> SweepCurve(const std::string& attack, const TapNet& net,
                                      const TapNet* substitute, const LabeledImageSet& test,
                                      std::span<const double> eps, double c, std::uint64_t seed) {
  if (attack == "transfer") return TransferAttack(*substitute, net, test, eps).curve;
  return NoiseAttack(net, test, ParseNoiseFamily(attack), eps, seed, c).curve;
}

std::vector<AccuracyPoint> MeanCurve(const std::vector<std::vector<AccuracyPoint>>& curves) {
  std::vector<AccuracyPoint> mean = curves.front();
  for (std::size_t k = 0; k < mean.size(); ++k) {
    double sum = 0.0;
    for (const auto& c : curves) sum += c[k].accuracy;
    mean[k].accuracy = sum / static_cast<double>(curves.size());
  }
  return mean;
}

nlohmann::json CurveJson(std::span<const AccuracyPoint> curve) {
  nlohmann::json out = nlohmann::json::array();
  for (const AccuracyPoint& p : curve) out.push_back({{"eps", p.eps}, {"accuracy", p.accuracy}});
  return out;
}

}  // namespace

ExperimentConfig LoadConfig(const std::string& path, const std::vector<std::string>& overrides) {
  ExperimentConfig config = ExperimentConfig::LoadFile(path);
  for (const std::string& kv : overrides) {
    const std::size_t eq = kv.find('=');
    Require(eq != std::string::npos, ErrorCode::kConfig, "--set expects key=value, got '" + kv + "'");
    auto trim = [](std::string_view s) {
      while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
      while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
      return s;
    };
    config.Set(trim(std::string_view(kv).substr(0, eq)), trim(std::string_view(kv).substr(eq + 1)));
  }
  config.Validate();
  return config;
}

TrainedRun TrainInto(RunDir& run, const std::string& prefix, const ExperimentConfig& config,
                     const Io& io) {
  for (const std::string& id : {config.train_data, config.test_data, config.reg_data}) {
    for (const auto& path : DatasetFiles(id)) run.AddInput(path);
  }
  if (!config.target_file.empty()) run.AddInput(config.target_file);

  Stopwatch prepare;
  TrainData data = PrepareData(config);
  run.AddTiming(prefix + "prepare", prepare.Seconds());

  std::ostringstream log;
  TrainCallbacks callbacks;
  callbacks.log = &log;
  callbacks.on_epoch = [&](const EpochRecord& e) {
    io.err << prefix << "epoch " << e.epoch << ": train " << std::setprecision(4)
           << e.train_accuracy << " test " << e.test_accuracy << " task " << e.task_loss
           << " sim " << e.sim_loss << " gamma " << FormatGamma(e.gamma) << "\n";
  };
  Stopwatch train;
  TrainResult result = Train(config, data, callbacks);
  TrainedRun out{std::move(data), std::move(result)};
  run.AddTiming(prefix + "train", train.Seconds());

  run.WriteText(prefix + "config.txt", config.CanonicalText(false));
  const std::vector<float> logits = out.result.mixer.LogitValues();
  SaveModelFile(run.Path(prefix + "model.pxnn"), out.result.net, logits);
  run.AddArtifact(prefix + "model.pxnn");
  run.WriteText(prefix + "log.jsonl", log.str());

  nlohmann::json summary;
  summary["config_hash"] = config.Hash();
  summary["architecture"] = {{"layers", out.data.arch.LayersToString()},
                             {"taps", out.data.arch.TapsToString()}};
  summary["target"] = TargetSummary(out.data.target);
  nlohmann::json epochs = nlohmann::json::array();
  for (const EpochRecord& e : out.result.epochs) epochs.push_back(EpochSummary(e));
  summary["epochs"] = epochs;
  summary["test_accuracy"] = out.result.epochs.empty() ? 0.0 : out.result.epochs.back().test_accuracy;
  summary["gamma"] = out.result.mixer.Weights();
  summary["mixer_logits"] = logits;
  run.WriteText(prefix + "summary.json", summary.dump(2) + "\n");
  return out;
}

LabeledImageSet LoadEvalSet(const std::string& id, bool grayscale, std::uint64_t limit) {
  LabeledImageSet set = LoadDataset(id);
  if (limit > 0) set = set.Head(limit);
  if (grayscale && set.channels() == 3) set = ToGrayscale(set);
  return set;
}

void CheckModelInput(const TapNet& net, const LabeledImageSet& set) {
  const Architecture& a = net.arch();
  const bool ok = static_cast<std::size_t>(a.in_channels) == set.channels() &&
                  static_cast<std::size_t>(a.in_height) == set.height() &&
                  static_cast<std::size_t>(a.in_width) == set.width();
  Require(ok, ErrorCode::kShapeMismatch,
          "model expects (" + std::to_string(a.in_channels) + ", " + std::to_string(a.in_height) +
              ", " + std::to_string(a.in_width) + ") images, dataset has " +
              ShapeToString({set.channels(), set.height(), set.width()}));
}

int CmdTrain(const TrainOptions& o, RunDir& run, const Io& io) {
  const ExperimentConfig config = LoadConfig(o.config, o.overrides);
  run.AddInput(o.config);
  run.SetConfigHash(config.Hash());
  run.SetSeed("seed", config.seed);
  const TrainedRun trained = TrainInto(run, "", config, io);
  run.Finish();
  const EpochRecord& last = trained.result.epochs.back();
  io.out << "test_accuracy " << std::setprecision(6) << last.test_accuracy << "\n"
         << "gamma " << FormatGamma(last.gamma) << "\n"
         << "run " << run.root().string() << "\n";
  return 0;
}

int CmdAttack(const AttackOptions& o, RunDir& run, const Io& io) {
  run.AddInput(o.model);
  for (const auto& path : DatasetFiles(o.data)) run.AddInput(path);
  run.SetSeed("seed", o.seed);
  const LoadedModel model = LoadModelFile(o.model);
  const LabeledImageSet set = LoadEvalSet(o.data, o.grayscale, o.limit);
  CheckModelInput(model.net, set);

  Stopwatch watch;
  AttackReport report;
  if (o.attack == "boundary") {
    report = BoundaryAttackReport(model.net, set, o.boundary, o.images, o.repeats, o.seed);
  } else if (o.attack == "fgsm") {
    report = TransferAttack(model.net, model.net, set, o.eps);
  } else if (o.attack == "transfer") {
    Require(!o.substitute.empty(), ErrorCode::kConfig, "transfer attack needs --substitute");
    run.AddInput(o.substitute);
    const LoadedModel substitute = LoadModelFile(o.substitute);
    CheckModelInput(substitute.net, set);
    report = TransferAttack(substitute.net, model.net, set, o.eps);
  } else {
    report = NoiseAttack(model.net, set, ParseNoiseFamily(o.attack), o.eps, o.seed, o.c);
  }
  run.AddTiming("attack", watch.Seconds());
  run.WriteText("report.json", report.ToJson() + "\n");
  run.Finish();

  io.out << std::setprecision(6);
  if (o.attack == "boundary") {
    io.out << "score " << report.score << " failures " << report.failures << "\n";
  } else {
    for (const AccuracyPoint& p : report.curve) {
      io.out << "eps " << p.eps << " accuracy " << p.accuracy << "\n";
    }
  }
  return 0;
}

int CmdSweep(const SweepOptions& o, RunDir& run, const Io& io) {
  Require(!o.alphas.empty() && !o.ths.empty() && !o.seeds.empty(), ErrorCode::kConfig,
          "sweep needs non-empty --alpha, --th and --seeds lists");
  Require(o.attack == "transfer" || o.attack == "gaussian" || o.attack == "uniform" ||
              o.attack == "salt_pepper",
          ErrorCode::kConfig, "sweep attack must be gaussian, uniform, salt_pepper or transfer");
  const double eps_high = o.eps_high >= 0.0 ? o.eps_high
                                            : (o.attack == "transfer" ? kEpsHighFgsm : kEpsHighRandom);
  auto on_grid = [&](double e) {
    return std::any_of(o.eps.begin(), o.eps.end(), [&](double g) { return std::abs(g - e) <= 1e-12; });
  };
  Require(on_grid(0.0) && on_grid(eps_high), ErrorCode::kConfig,
          "--eps must contain 0 and the high-distortion eps");

  const ExperimentConfig base = LoadConfig(o.config, o.overrides);
  run.AddInput(o.config);
  run.SetConfigHash(base.Hash());

  nlohmann::json cells = nlohmann::json::array();
  std::map<std::uint64_t, std::vector<AccuracyPoint>> baseline_curves;
  std::map<std::uint64_t, TapNet> substitutes;
  for (std::uint64_t seed : o.seeds) {
    run.SetSeed("seed_" + std::to_string(seed), seed);
    ExperimentConfig cfg = base;
    cfg.seed = seed;
    cfg.alpha = 0.0;
    io.err << "baseline seed " << seed << "\n";
    const TrainedRun baseline = TrainInto(run, "cells/baseline_s" + std::to_string(seed) + "/", cfg, io);
    if (o.attack == "transfer") {
      ExperimentConfig sub = cfg;
      sub.seed = seed + 1000;
      run.SetSeed("substitute_" + std::to_string(seed), sub.seed);
      io.err << "substitute seed " << sub.seed << "\n";
      substitutes.emplace(seed,
                          TrainInto(run, "cells/substitute_s" + std::to_string(seed) + "/", sub, io)
                              .result.net);
    }
    const TapNet* substitute = o.attack == "transfer" ? &substitutes.at(seed) : nullptr;
    baseline_curves[seed] = SweepCurve(o.attack, baseline.result.net, substitute, baseline.data.test,
                                       o.eps, o.c, seed);
    cells.push_back({{"alpha", 0.0}, {"th", nullptr}, {"seed", seed},
                     {"curve", CurveJson(baseline_curves[seed])}});
  }

  std::vector<TradeoffPoint> points;
  for (double alpha : o.alphas) {
    for (double th : o.ths) {
      std::vector<std::vector<AccuracyPoint>> reg, unreg;
      for (std::uint64_t seed : o.seeds) {
        ExperimentConfig cfg = base;
        cfg.seed = seed;
        cfg.alpha = alpha;
        cfg.th = th;
        cfg.Validate();
        const std::string name = CellName(alpha, th, seed);
        io.err << "cell " << name << "\n";
        nlohmann::json cell = {{"alpha", alpha}, {"th", th}, {"seed", seed}};
        try {
          const TrainedRun trained = TrainInto(run, name, cfg, io);
          const TapNet* substitute = o.attack == "transfer" ? &substitutes.at(seed) : nullptr;
          reg.push_back(SweepCurve(o.attack, trained.result.net, substitute, trained.data.test, o.eps,
                                   o.c, seed));
          cell["curve"] = CurveJson(reg.back());
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kNumeric) throw;
          // A diverged cell scores zero accuracy everywhere.
          io.err << "cell " << name << " diverged: " << e.what() << "\n";
          std::vector<AccuracyPoint> zero;
          for (double eps : o.eps) zero.push_back({eps, 0.0});
          reg.push_back(zero);
          cell["curve"] = CurveJson(zero);
          cell["error"] = e.what();
        }
        unreg.push_back(baseline_curves.at(seed));
        cells.push_back(cell);
      }
      points.push_back(Tradeoff(MeanCurve(reg), MeanCurve(unreg), eps_high, o.a0, alpha, th));
    }
  }

  nlohmann::json curves = {{"attack", o.attack}, {"eps", o.eps}, {"eps_high", eps_high},
                           {"a0", o.a0}, {"seeds", o.seeds}, {"cells", cells}};
  run.WriteText("curves.json", curves.dump(2) + "\n");
  run.WriteText("tradeoff.json", TradeoffJson(points) + "\n");
  run.Finish();

  io.out << std::setprecision(6);
  for (const TradeoffPoint& p : points) {
    io.out << "alpha " << p.alpha << " th " << p.th << " r0/u0 "
           << (p.r0_u0 ? std::to_string(*p.r0_u0) : "undefined") << " rd/ud "
           << (p.rd_ud ? std::to_string(*p.rd_ud) : "undefined")
           << (p.acceptable ? " acceptable" : " rejected") << "\n";
  }
  return 0;
}

}  // namespace pixreg::cli
