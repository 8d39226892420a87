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


#include <cmath>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

#include "commands.h"
#include "pixreg/analysis.h"
#include "pixreg/errors.h"
#include "pixreg/mixer.h"
#include "pixreg/model_io.h"
#include "pixreg/rng.h"
#include "pixreg/similarity.h"

namespace pixreg::cli {
namespace {

nlohmann::json ReadJson(const std::string& path) {
  std::ifstream in(path);
  Require(static_cast<bool>(in), ErrorCode::kIo, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormat, path + ": " + e.what());
  }
}

std::vector<AccuracyPoint> CurveFromReport(const std::string& path) {
  const nlohmann::json j = ReadJson(path);
  Require(j.contains("curve") && j["curve"].is_array(), ErrorCode::kFormat,
          path + ": report has no accuracy curve");
  std::vector<AccuracyPoint> curve;
  for (const auto& p : j["curve"]) curve.push_back({p.at("eps").get<double>(), p.at("accuracy").get<double>()});
  return curve;
}

nlohmann::json ProfileSummary(const RadialProfile& profile) {
  nlohmann::json j;
  j["mean_radius"] = MeanRadius(profile);
  j["band"] = std::string(FrequencyBandName(FrequencyCategory(profile)));
  return j;
}

}  // namespace

int CmdSpectrum(const SpectrumOptions& o, RunDir& run, const Io& io) {
  for (const auto& path : DatasetFiles(o.data)) run.AddInput(path);
  run.SetSeed("seed", o.seed);
  const LabeledImageSet set = LoadEvalSet(o.data, o.grayscale, o.limit);
  const Corruption corruption = ParseCorruption(o.corruption);
  const CorruptionSpectrumResult spectrum = CorruptionSpectrum(
      set, MakeCorruption(corruption, o.severity, set.height(), set.width()), o.seed);
  const RadialProfile profile = CorruptionPowerProfile(spectrum);

  run.WriteText("spectrum.csv", SpectrumCsv(spectrum.mean_magnitude));
  run.WriteText("log_spectrum.csv", SpectrumCsv(spectrum.log_view));
  run.WriteText("profile.csv", ProfileCsv(profile));
  nlohmann::json summary = ProfileSummary(profile);
  summary["corruption"] = o.corruption;
  summary["severity"] = o.severity;
  summary["images"] = set.size();
  run.WriteText("category.json", summary.dump(2) + "\n");
  run.Finish();
  io.out << o.corruption << " mean_radius " << std::setprecision(6)
         << summary["mean_radius"].get<double>() << " band " << summary["band"].get<std::string>()
         << "\n";
  return 0;
}

int CmdPerturbation(const PerturbationOptions& o, RunDir& run, const Io& io) {
  run.AddInput(o.model);
  for (const auto& path : DatasetFiles(o.data)) run.AddInput(path);
  run.SetSeed("seed", o.seed);
  const LoadedModel model = LoadModelFile(o.model);
  const LabeledImageSet set = LoadEvalSet(o.data, o.grayscale, o.images);
  CheckModelInput(model.net, set);

  const std::size_t c = set.channels(), h = set.height(), w = set.width();
  const DecisionFn decide = NetDecision(model.net, {c, h, w});
  BoundaryOptions options;
  options.steps = o.steps;
  const std::uint64_t base = DeriveSeed(o.seed, streams::kAttack);
  std::vector<double> power(h * w, 0.0);
  std::vector<double> scores;
  std::uint64_t attacked = 0, failures = 0, misclassified = 0;
  Stopwatch watch;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto x = set.images.Row(i);
    const BoundaryResult r = BoundaryAttack(decide, x, set.labels[i], options, DeriveSeed(base, i));
    if (!r.success) {
      ++failures;
      continue;
    }
    if (r.distance == 0.0) {
      ++misclassified;
      continue;
    }
    ++attacked;
    scores.push_back(r.distance * r.distance / static_cast<double>(x.size()));
    for (std::size_t ch = 0; ch < c; ++ch) {
      Tensor eta({h, w});
      for (std::size_t k = 0; k < h * w; ++k) eta[k] = x[ch * h * w + k] - r.adversarial[ch * h * w + k];
      const Tensor p = FourierPower(eta);
      for (std::size_t k = 0; k < h * w; ++k) power[k] += p[k];
    }
  }
  run.AddTiming("attack", watch.Seconds());
  Require(attacked > 0, ErrorCode::kInvalidArgument, "no image yielded a nonzero perturbation");
  Tensor mean({h, w});
  for (std::size_t k = 0; k < h * w; ++k) {
    mean[k] = static_cast<float>(power[k] / static_cast<double>(attacked * c));
  }
  const RadialProfile profile = RadialSpectrum(mean);
  run.WriteText("power.csv", SpectrumCsv(mean));
  run.WriteText("profile.csv", ProfileCsv(profile));
  nlohmann::json summary = ProfileSummary(profile);
  summary["images"] = set.size();
  summary["attacked"] = attacked;
  summary["failures"] = failures;
  summary["already_misclassified"] = misclassified;
  summary["steps"] = o.steps;
  summary["score"] = MedianOf(scores);
  run.WriteText("summary.json", summary.dump(2) + "\n");
  run.Finish();
  io.out << "perturbation mean_radius " << std::setprecision(6)
         << summary["mean_radius"].get<double>() << " band " << summary["band"].get<std::string>()
         << " score " << summary["score"].get<double>() << "\n";
  return 0;
}

int CmdCorrelation(const CorrelationOptions& o, RunDir& run, const Io& io) {
  run.AddInput(o.model);
  for (const auto& path : DatasetFiles(o.data)) run.AddInput(path);
  run.SetSeed("seed", o.seed);
  const LoadedModel model = LoadModelFile(o.model);
  const LabeledImageSet all = LoadEvalSet(o.data, o.grayscale, 0);
  CheckModelInput(model.net, all);
  const LabeledImageSet set = SelectRegularizationImages(all, o.images, o.seed);

  const Tensor pixel = PixelSimilarity(set.images);
  const ForwardResult fwd = model.net.Forward(set.images);
  const std::size_t k = fwd.taps.size();
  const GammaMixer mixer =
      model.mixer_logits.size() == k ? GammaMixer::FromLogits(model.mixer_logits) : GammaMixer(k);
  const std::vector<double> gamma = mixer.Weights();

  nlohmann::json taps = nlohmann::json::array();
  std::vector<Tensor> layers;
  for (std::size_t l = 0; l < k; ++l) {
    layers.push_back(LayerSimilarity(fwd.taps[l], "tap " + std::to_string(model.net.arch().taps[l])));
    taps.push_back({{"layer", model.net.arch().taps[l]}, {"pearson", SimCorrelation(pixel, layers.back())}});
  }
  const Tensor mixed = MixLayers(layers, mixer);
  nlohmann::json summary = {{"images", set.size()},
                            {"gamma", gamma},
                            {"pixel_vs_tap", taps},
                            {"pixel_vs_mixed", SimCorrelation(pixel, mixed)}};
  run.WriteText("correlation.json", summary.dump(2) + "\n");
  run.Finish();
  io.out << "pixel_vs_mixed " << std::setprecision(6) << summary["pixel_vs_mixed"].get<double>() << "\n";
  return 0;
}

int CmdTradeoff(const TradeoffOptions& o, RunDir& run, const Io& io) {
  run.AddInput(o.reg);
  run.AddInput(o.unreg);
  const TradeoffPoint p =
      Tradeoff(CurveFromReport(o.reg), CurveFromReport(o.unreg), o.eps_high, o.a0);
  const std::vector<TradeoffPoint> points = {p};
  run.WriteText("tradeoff.json", TradeoffJson(points) + "\n");
  run.Finish();
  io.out << (p.acceptable ? "acceptable" : "rejected") << "\n";
  return 0;
}

}  // namespace pixreg::cli
