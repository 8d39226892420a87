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


// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// fails. Optional arguments select criteria by number ("acceptance 1 3 7").

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gradient_suite.h"
#include "oracles.h"
#include "pixreg/analysis.h"
#include "pixreg/attacks.h"
#include "pixreg/config.h"
#include "pixreg/datasets.h"
#include "pixreg/errors.h"
#include "pixreg/model_io.h"
#include "pixreg/rng.h"
#include "pixreg/sim_loss.h"
#include "pixreg/similarity.h"
#include "pixreg/target.h"
#include "pixreg/trainer.h"
#include "support.h"

#if PIXREG_HAVE_CLI
#include "cli.h"
#endif

using namespace pixreg;

namespace {

// Pinned tolerances.
constexpr double kGradTol = 1e-3;
constexpr double kGradMaxSkipped = 0.10;
constexpr std::size_t kGradTrials = 100;
constexpr double kSinglePairTol = 1e-4;
constexpr double kParsevalTol = 1e-4;
constexpr double kShiftTol = 1e-6;
constexpr double kPartitionTol = 1e-6;
constexpr double kSimplexTol = 1e-6;
constexpr double kSimilarityOracleTol = 1e-6;
constexpr double kCorrelationOracleTol = 1e-9;
constexpr double kFgsmEps = 0.1;
constexpr double kFgsmMinDrop = 0.20;
constexpr double kA0 = 0.9;
constexpr double kEpsHigh = 0.3;
constexpr std::size_t kBoundaryImages = 100;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// Desk-scale training runs shared by criteria 4, 5, 6 and 8.

struct DeskRun {
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::optional<TrainResult> result;  // empty when training failed
  std::string error;
  std::vector<std::vector<double>> gammas;  // every epoch, failed runs included
  std::vector<AccuracyPoint> curve;
};

struct DeskRuns {
  std::vector<DeskRun> baseline;
  std::vector<DeskRun> regularized;
  LabeledImageSet test;
};

const std::vector<double> kNoiseGrid = {0.0, 0.1, 0.2, 0.3, 0.5, 0.8, 1.0};
const std::vector<std::uint64_t> kSeeds = {1, 2, 3};

ExperimentConfig DeskConfig(double alpha, std::uint64_t seed) {
  ExperimentConfig c;
  c.train_data = testing::MnistTrain();
  c.test_data = testing::MnistTest();
  c.train_limit = 10000;
  c.epochs = 5;
  c.alpha = alpha;
  c.th = 0.2;
  c.num_reg_images = 1000;
  c.seed = seed;
  c.Validate();
  return c;
}

DeskRun TrainDesk(double alpha, std::uint64_t seed, LabeledImageSet* test_out) {
  DeskRun run;
  run.alpha = alpha;
  run.seed = seed;
  const ExperimentConfig config = DeskConfig(alpha, seed);
  const TrainData data = PrepareData(config);
  if (test_out && test_out->size() == 0) *test_out = data.test;
  TrainCallbacks callbacks;
  callbacks.on_epoch = [&](const EpochRecord& e) {
    run.gammas.push_back(e.gamma);
    std::printf("    alpha %g seed %llu epoch %llu: train %.4f test %.4f sim %.4g\n", alpha,
                static_cast<unsigned long long>(seed), static_cast<unsigned long long>(e.epoch),
                e.train_accuracy, e.test_accuracy, e.sim_loss);
    std::fflush(stdout);
  };
  try {
    run.result = Train(config, data, callbacks);
    run.curve = NoiseAttack(run.result->net, data.test, NoiseFamily::kGaussian, kNoiseGrid,
                            DeriveSeed(seed, streams::kAttack))
                    .curve;
  } catch (const Error& e) {
    run.error = std::string(ErrorCodeName(e.code())) + ": " + e.what();
    std::printf("    alpha %g seed %llu failed: %s\n", alpha, static_cast<unsigned long long>(seed),
                run.error.c_str());
  }
  return run;
}

const DeskRuns& Desk() {
  static const DeskRuns runs = [] {
    DeskRuns r;
    for (std::uint64_t seed : kSeeds) {
      r.baseline.push_back(TrainDesk(0.0, seed, &r.test));
      r.regularized.push_back(TrainDesk(4.0, seed, nullptr));
    }
    return r;
  }();
  return runs;
}

double At(const std::vector<AccuracyPoint>& curve, double eps) {
  for (const AccuracyPoint& p : curve) {
    if (std::abs(p.eps - eps) < 1e-12) return p.accuracy;
  }
  return 0.0;  // a failed run scores zero everywhere
}

const TapNet* FirstBaselineNet() {
  for (const DeskRun& r : Desk().baseline) {
    if (r.result) return &r.result->net;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

Outcome GradientCorrectness() {
  double worst = 0.0;
  std::size_t coords = 0, skipped = 0;
  std::string worst_kind, detail;
  bool pass = true;
  for (const std::string& kind : testing::GradientKinds()) {
    const testing::SuiteResult r = testing::RunGradientSuite(kind, kGradTrials, 1234);
    const double skip_frac = static_cast<double>(r.skipped) / static_cast<double>(r.coords);
    std::printf("    %-12s trials %zu worst %.3g skipped %zu/%zu\n", kind.c_str(), r.trials,
                r.worst, r.skipped, r.coords);
    pass = pass && r.trials >= kGradTrials && r.worst < kGradTol && skip_frac < kGradMaxSkipped;
    if (r.worst > worst) {
      worst = r.worst;
      worst_kind = kind;
    }
    coords += r.coords;
    skipped += r.skipped;
  }
  return {pass, Fmt("%zu kinds x %zu trials, worst rel error %.3g (%s), %zu/%zu coords at kinks",
                    testing::GradientKinds().size(), kGradTrials, worst, worst_kind.c_str(), skipped,
                    coords)};
}

Outcome LossIdentities() {
  constexpr double eps = 1e-6;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-0.95, 0.95);
  double at_target = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    SimilarityTarget t(6, {TargetMode::kPixel, 0.0, 0.0, eps});
    Tensor s({6, 6}, 1.0f);
    for (std::size_t i = 1; i < 6; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const float v = static_cast<float>(u(rng));
        t.Set(i, j, v, true);
        s.at({i, j}) = s.at({j, i}) = v;
      }
    }
    at_target = std::max(at_target, std::abs(SimLossMatrixValue(s, t)));
  }
  const SimilarityTarget empty(4, {TargetMode::kThreshold, 0.5, 0.0, eps});
  const double empty_loss = SimLossMatrixValue(testing::RandomTensor({4, 4}, rng, -0.9, 0.9), empty);
  const std::vector<float> s0{0.0f}, hi{static_cast<float>(1.0 - eps)};
  const double single = SimLossPairsValue(s0, hi, eps);
  const double rel = std::abs(single - oracle::kSinglePairLoss) / oracle::kSinglePairLoss;
  return {at_target == 0.0 && empty_loss == 0.0 && rel < kSinglePairTol,
          Fmt("loss at target %g, empty mask %g, single pair %.10g vs %.10g (rel %.2g)", at_target,
              empty_loss, single, oracle::kSinglePairLoss, rel)};
}

Outcome PairCountIdentity() {
  const std::uint64_t n = PairCount(5000);
  std::uint64_t enumerated = 0;
  for (std::uint64_t i = 1; i < 5000; ++i) enumerated += i;
  const bool pass = n == 12497500 && enumerated == n && TriangleIndex(4999, 4998) == n - 1;
  return {pass, Fmt("PairCount(5000) = %llu, enumerated %llu", static_cast<unsigned long long>(n),
                    static_cast<unsigned long long>(enumerated))};
}

Outcome DirectionOfEffect() {
  const DeskRuns& d = Desk();
  double r0u0 = 0.0, rdud = 0.0, top = 0.0;
  std::vector<std::string> failures;
  for (std::size_t k = 0; k < kSeeds.size(); ++k) {
    const DeskRun& u = d.baseline[k];
    const DeskRun& r = d.regularized[k];
    if (!u.error.empty()) failures.push_back("baseline seed " + std::to_string(u.seed) + ": " + u.error);
    if (!r.error.empty()) failures.push_back("alpha=4 seed " + std::to_string(r.seed) + ": " + r.error);
    const double u0 = At(u.curve, 0.0), ud = At(u.curve, kEpsHigh);
    const double r0 = At(r.curve, 0.0), rd = At(r.curve, kEpsHigh);
    std::printf("    seed %llu: U0 %.4f Ud %.4f R0 %.4f Rd %.4f U(top) %.4f\n",
                static_cast<unsigned long long>(u.seed), u0, ud, r0, rd, At(u.curve, kNoiseGrid.back()));
    r0u0 += u0 > 0.0 ? r0 / u0 : 0.0;
    rdud += ud > 0.0 ? rd / ud : 0.0;
    top = std::max(top, At(u.curve, kNoiseGrid.back()));
  }
  r0u0 /= static_cast<double>(kSeeds.size());
  rdud /= static_cast<double>(kSeeds.size());
  const bool grid_ok = top < 0.5;
  std::string detail = Fmt("mean R0/U0 %.4f (need >= %.2f), mean RD/UD %.4f at eps %.1f (need > 1), "
                           "baseline top-of-grid accuracy %.4f",
                           r0u0, kA0, rdud, kEpsHigh, top);
  for (const std::string& f : failures) detail += "; " + f;
  return {r0u0 >= kA0 && rdud > 1.0 && grid_ok, detail};
}

Outcome BoundaryInvariants() {
  const std::size_t d = 784;
  std::mt19937_64 rng(5);
  double worst_toy = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Tensor x = testing::RandomTensor({d}, rng, 0.0, 1.0);
    const BoundaryResult r = BoundaryAttack([](std::span<const float>) { return 1; }, x.data(), 0,
                                            BoundaryOptions{}, rng());
    worst_toy = std::max(worst_toy, r.success ? r.distance : std::numeric_limits<double>::infinity());
  }
  const bool toy_ok = worst_toy <= 1e-3 * std::sqrt(static_cast<double>(d));

  const TapNet* net = FirstBaselineNet();
  if (!net) return {false, "no trained baseline model available"};
  const LabeledImageSet& set = Desk().test;
  const DecisionFn decide = NetDecision(*net, {1, 28, 28});
  std::size_t accepted = 0, violations = 0, attacked = 0;
  BoundaryOptions opts;
  opts.steps = 50;
  for (std::size_t i = 0; i < kBoundaryImages; ++i) {
    const std::span<const float> x = set.images.Row(i);
    const int label = set.labels[i];
    double last = std::numeric_limits<double>::infinity();
    const BoundaryResult r = BoundaryAttack(
        decide, x, label, opts, DeriveSeed(77, i), [&](std::span<const float> adv, double dist) {
          ++accepted;
          if (decide(adv) == label) ++violations;
          if (dist > last) ++violations;
          last = dist;
        });
    for (std::size_t s = 1; s < r.trajectory.size(); ++s) {
      if (r.trajectory[s] > r.trajectory[s - 1]) ++violations;
    }
    ++attacked;
  }
  return {toy_ok && violations == 0 && accepted > 0,
          Fmt("%zu images x %llu steps, %zu accepted states, %zu violations; constant toy worst "
              "distance %.3g (bound %.3g)",
              attacked, static_cast<unsigned long long>(opts.steps), accepted, violations, worst_toy,
              1e-3 * std::sqrt(static_cast<double>(d)))};
}

Outcome FgsmBudget() {
  const TapNet* net = FirstBaselineNet();
  if (!net) return {false, "no trained baseline model available"};
  const LabeledImageSet& set = Desk().test;
  double worst_linf = 0.0;
  bool in_range = true;
  for (std::size_t start = 0; start < set.size(); start += 500) {
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < std::min(set.size(), start + 500); ++i) idx.push_back(i);
    const Tensor x = set.Batch(idx);
    const Tensor adv = Fgsm(*net, x, set.BatchLabels(idx), kFgsmEps);
    for (std::size_t k = 0; k < x.size(); ++k) {
      worst_linf = std::max(worst_linf, static_cast<double>(std::abs(adv[k] - x[k])));
      in_range = in_range && adv[k] >= 0.0f && adv[k] <= 1.0f;
    }
  }
  const std::vector<double> grid{0.0, kFgsmEps};
  const AttackReport report = TransferAttack(*net, *net, set, grid);
  const double clean = report.curve[0].accuracy, attacked = report.curve[1].accuracy;
  // float32 rounding of x + eps can exceed eps by one ulp of the pixel.
  const bool budget = worst_linf <= kFgsmEps + 1e-6;
  return {budget && in_range && clean - attacked >= kFgsmMinDrop,
          Fmt("max |x_adv - x|_inf %.7f (eps %.2f), clean %.4f, white-box %.4f, drop %.1f pp",
              worst_linf, kFgsmEps, clean, attacked, 100.0 * (clean - attacked))};
}

Outcome FourierIdentities() {
  std::mt19937_64 rng(31);
  double parseval = 0.0, shift = 0.0, partition = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t h = 4 + rng() % 29, w = 4 + rng() % 29;
    const Tensor x = testing::RandomTensor({h, w}, rng);
    const Tensor p = FourierPower(x);
    double energy = 0.0, total = 0.0, peak = 0.0;
    for (float v : x.data()) energy += static_cast<double>(v) * v;
    for (float v : p.data()) {
      total += v;
      peak = std::max(peak, static_cast<double>(v));
    }
    const double hw = static_cast<double>(h * w);
    parseval = std::max(parseval, std::abs(total - hw * energy) / (hw * energy));

    const std::size_t dy = rng() % h, dx = rng() % w;
    Tensor shifted({h, w});
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j < w; ++j) shifted.at({(i + dy) % h, (j + dx) % w}) = x.at({i, j});
    }
    const Tensor q = FourierPower(shifted);
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double scale = std::max(static_cast<double>(p[k]), 1e-6 * peak);
      shift = std::max(shift, std::abs(p[k] - q[k]) / scale);
    }

    const RadialProfile rp = RadialSpectrum(p);
    double sum = rp.corner_mean * static_cast<double>(rp.corner_count);
    for (std::size_t r = 0; r < rp.mean.size(); ++r) sum += rp.mean[r] * static_cast<double>(rp.count[r]);
    partition = std::max(partition, std::abs(sum - total) / total);
  }
  return {parseval < kParsevalTol && shift <= kShiftTol && partition < kPartitionTol,
          Fmt("200 trials: Parseval rel %.2g, shift per-bin rel %.2g, radial partition rel %.2g",
              parseval, shift, partition)};
}

Outcome GammaSimplex() {
  const DeskRuns& d = Desk();
  double worst_sum = 0.0, min_entry = std::numeric_limits<double>::infinity();
  std::size_t records = 0;
  for (const auto* group : {&d.baseline, &d.regularized}) {
    for (const DeskRun& r : *group) {
      std::vector<std::vector<double>> all = r.gammas;
      if (r.result) all.push_back(r.result->mixer.Weights());
      for (const auto& g : all) {
        double sum = 0.0;
        for (double v : g) {
          sum += v;
          min_entry = std::min(min_entry, v);
        }
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
        ++records;
      }
    }
  }
  return {records > 0 && worst_sum <= kSimplexTol && min_entry >= 0.0,
          Fmt("%zu gamma records, max |sum - 1| %.2g, min entry %.3g", records, worst_sum,
              min_entry)};
}

Outcome OracleEquivalences() {
  std::mt19937_64 rng(41);
  std::size_t trials = 0;
  double pixel = 0.0, layer = 0.0, corr = 0.0;
  auto worst_vs_oracle = [](const Tensor& rows, const Tensor& got) {
    const std::size_t n = rows.dim(0);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ri = rows.Row(i);
      for (std::size_t j = 0; j < i; ++j) {
        const auto rj = rows.Row(j);
        const double want = oracle::CenteredCosine({ri.begin(), ri.end()}, {rj.begin(), rj.end()});
        worst = std::max(worst, std::abs(got.at({i, j}) - want));
        if (got.at({i, j}) != got.at({j, i})) worst = std::numeric_limits<double>::infinity();
      }
    }
    return worst;
  };
  for (int t = 0; t < 400; ++t, ++trials) {
    const std::size_t n = 2 + rng() % 12, side = 4 + rng() % 9;
    const Tensor imgs = testing::RandomTensor({n, 1, side, side}, rng, 0.0, 1.0);
    pixel = std::max(pixel, worst_vs_oracle(imgs.Reshaped({n, side * side}), PixelSimilarity(imgs)));
  }
  for (int t = 0; t < 400; ++t, ++trials) {
    const std::size_t n = 2 + rng() % 12, f = 3 + rng() % 60;
    const Tensor feats = testing::RandomTensor({n, f}, rng, -3.0, 3.0);
    layer = std::max(layer, worst_vs_oracle(feats, LayerSimilarity(feats)));
  }
  for (int t = 0; t < 200; ++t, ++trials) {
    const std::size_t n = 3 + rng() % 40;
    auto symmetric = [&] {
      Tensor m = testing::RandomTensor({n, n}, rng);
      for (std::size_t i = 0; i < n; ++i) {
        m.at({i, i}) = 1.0f;
        for (std::size_t j = 0; j < i; ++j) m.at({j, i}) = m.at({i, j});
      }
      return m;
    };
    const Tensor a = symmetric(), b = symmetric();
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        xs.push_back(a.at({i, j}));
        ys.push_back(b.at({i, j}));
      }
    }
    corr = std::max(corr, std::abs(SimCorrelation(a, b) - oracle::Pearson(xs, ys)));
  }
  return {trials >= 1000 && pixel <= kSimilarityOracleTol && layer <= kSimilarityOracleTol &&
              corr <= kCorrelationOracleTol,
          Fmt("%zu trials: pixel %.2g, layer %.2g (tol %.0e), correlation %.2g (tol %.0e)", trials,
              pixel, layer, kSimilarityOracleTol, corr, kCorrelationOracleTol)};
}

Outcome Reproducibility() {
#if PIXREG_HAVE_CLI
  testing::TempDir dir;
  ExperimentConfig c = testing::TinyConfig(512, 64);
  c.arch = "conv4,relu,pool2,conv8,relu,pool2,fc10";
  c.alpha = 0.01;
  const std::string config = (dir / "run.cfg").string();
  const std::string text_config = c.CanonicalText(false);
  WriteFileBytes(config, Bytes(text_config.begin(), text_config.end()));
  std::ostringstream out, err;
  const int train = cli::RunCli({"train", "--config", config, "--out", (dir / "first").string()}, out, err);
  if (train != 0) return {false, "training run failed: " + err.str()};
  std::ostringstream rout, rerr;
  const int replay = cli::RunCli({"replay", "--manifest", (dir / "first" / "manifest.json").string(),
                                  "--out", (dir / "second").string()},
                                 rout, rerr);
  const std::string text = rout.str();
  std::size_t same = 0;
  for (std::size_t at = text.find("same "); at != std::string::npos; at = text.find("same ", at + 1)) {
    ++same;
  }
  return {replay == 0 && text.find("replay identical") != std::string::npos,
          Fmt("replay exit %d, %zu artifacts byte-identical%s", replay, same,
              replay == 0 ? "" : (", " + text + rerr.str()).c_str())};
#else
  return {false, "built without the command-line tools"};
#endif
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", GradientCorrectness},
      {2, "loss identities", LossIdentities},
      {3, "pair-count identity", PairCountIdentity},
      {4, "desk-scale direction of effect", DirectionOfEffect},
      {5, "boundary-attack invariants", BoundaryInvariants},
      {6, "FGSM budget and effectiveness", FgsmBudget},
      {7, "Fourier identities", FourierIdentities},
      {8, "gamma simplex", GammaSimplex},
      {9, "oracle equivalences", OracleEquivalences},
      {10, "reproducibility", Reproducibility},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    std::printf("  running criterion %d (%s)\n", c.id, c.name);
    std::fflush(stdout);
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("unexpected error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d: %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
