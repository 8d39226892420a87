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


#include "pixreg/trainer.h"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <optional>

#include "pixreg/errors.h"
#include "pixreg/layers.h"
#include "pixreg/optim.h"
#include "pixreg/rng.h"
#include "pixreg/sim_loss.h"

namespace pixreg {
namespace {

constexpr std::size_t kEvalBatch = 250;

LabeledImageSet MatchGeometry(LabeledImageSet set, const LabeledImageSet& like, bool grayscale) {
  if (grayscale && set.channels() == 3) set = ToGrayscale(set);
  if (set.channels() != like.channels()) {
    Require(set.channels() == 3 && like.channels() == 1, ErrorCode::kShapeMismatch,
            "regularization images have " + std::to_string(set.channels()) +
                " channels, classifier input has " + std::to_string(like.channels()));
    set = ToGrayscale(set);
  }
  if (set.height() != like.height() || set.width() != like.width()) {
    set = CenterCropResize(set, like.height(), like.width());
  }
  return set;
}

// Similarity loss of the given pairs, recorded on `tape`. Pair p uses batch
// rows 2p and 2p + 1.
Var RegularizationLoss(Tape& tape, TapNet& net, GammaMixer& mixer, const TrainData& data,
                       const std::vector<IndexPair>& pairs, double eps_clamp,
                       std::uint64_t& forwarded) {
  std::vector<std::size_t> rows;
  std::vector<IndexPair> local;
  std::vector<float> targets;
  rows.reserve(2 * pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    rows.push_back(pairs[p].first);
    rows.push_back(pairs[p].second);
    local.emplace_back(2 * p, 2 * p + 1);
    targets.push_back(data.target.value(pairs[p].first, pairs[p].second));
  }
  const Var x = tape.Constant(data.reg.Batch(rows));
  const TapOutputs out = net.Forward(tape, x);
  forwarded = x.value().dim(0);
  std::vector<Var> per_layer;
  per_layer.reserve(out.taps.size());
  for (std::size_t t = 0; t < out.taps.size(); ++t) {
    per_layer.push_back(PairCosine(out.taps[t], local, "tap " + std::to_string(t)));
  }
  const Var s_cnn = MixLayers(per_layer, mixer.Weights(tape));
  return SimLossPairs(s_cnn, targets, eps_clamp);
}

nlohmann::json StepJson(const StepRecord& s) {
  return {{"type", "step"},         {"step", s.step},           {"epoch", s.epoch},
          {"lr", s.lr},             {"task_loss", s.task_loss}, {"sim_loss", s.sim_loss},
          {"total_loss", s.total_loss}, {"reg_images", s.reg_images}};
}

nlohmann::json EpochJson(const EpochRecord& e) {
  return {{"type", "epoch"},
          {"epoch", e.epoch},
          {"steps", e.steps},
          {"train_accuracy", e.train_accuracy},
          {"test_accuracy", e.test_accuracy},
          {"task_loss", e.task_loss},
          {"sim_loss", e.sim_loss},
          {"gamma", e.gamma}};
}

}  // namespace

TrainData PrepareData(const ExperimentConfig& config) {
  config.Validate();
  TrainData data;
  data.train = LoadDataset(config.train_data);
  if (config.train_limit > 0) data.train = data.train.Head(config.train_limit);
  data.test = LoadDataset(config.test_data);
  if (config.test_limit > 0) data.test = data.test.Head(config.test_limit);
  if (config.grayscale && data.train.channels() == 3) data.train = ToGrayscale(data.train);
  if (config.grayscale && data.test.channels() == 3) data.test = ToGrayscale(data.test);
  Require(data.train.images.shape()[1] == data.test.images.shape()[1] &&
              data.train.height() == data.test.height() && data.train.width() == data.test.width(),
          ErrorCode::kShapeMismatch, "train and test images differ in shape");

  LabeledImageSet reg_source =
      config.reg_data.empty() ? data.train : LoadDataset(config.reg_data);
  reg_source = MatchGeometry(std::move(reg_source), data.train, config.grayscale);
  data.reg = SelectRegularizationImages(reg_source, config.num_reg_images, config.seed);

  if (config.target_file.empty()) {
    data.target = BuildTargetFromImages(data.reg.images, config.target_params());
  } else {
    data.target = SimilarityTarget::LoadFile(config.target_file);
    Require(data.target.size() == data.reg.size(), ErrorCode::kConfig,
            "target_file covers " + std::to_string(data.target.size()) + " images, config selects " +
                std::to_string(data.reg.size()));
  }

  const int classes = std::max(data.train.num_classes, data.test.num_classes);
  const int c = static_cast<int>(data.train.channels());
  const int h = static_cast<int>(data.train.height());
  const int w = static_cast<int>(data.train.width());
  const std::string layers =
      config.arch == "default" ? Architecture::DeskDefault(c, h, w, classes).LayersToString()
                               : config.arch;
  data.arch = Architecture::Parse(layers, config.taps, c, h, w);
  Require(data.arch.num_classes() >= classes, ErrorCode::kShapeMismatch,
          "architecture has " + std::to_string(data.arch.num_classes()) +
              " outputs but the data has " + std::to_string(classes) + " classes");
  return data;
}

PairSampler::PairSampler(const SimilarityTarget& target, std::uint64_t seed)
    : target_(&target), rng_(MakeRng(seed, streams::kPairs)) {
  const std::uint64_t masked = target.CountMasked();
  Require(masked > 0, ErrorCode::kConfig, "similarity target admits no pairs");
  if (masked * 20 < target.pair_count()) {
    for (std::size_t i = 1; i < target.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (target.masked(i, j)) listed_.emplace_back(i, j);
      }
    }
  }
}

std::vector<IndexPair> PairSampler::Sample(std::size_t k) {
  std::vector<IndexPair> out;
  out.reserve(k);
  if (!listed_.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, listed_.size() - 1);
    for (std::size_t p = 0; p < k; ++p) out.push_back(listed_[pick(rng_)]);
    return out;
  }
  const std::size_t n = target_->size();
  std::uniform_int_distribution<std::size_t> first(0, n - 1), second(0, n - 2);
  while (out.size() < k) {
    const std::size_t i = first(rng_);
    std::size_t j = second(rng_);
    if (j >= i) ++j;
    if (target_->masked(i, j)) out.emplace_back(i, j);
  }
  return out;
}

TrainResult Train(const ExperimentConfig& config, const TrainData& data,
                  const TrainCallbacks& callbacks) {
  config.Validate();
  const TargetParams tp = data.target.params();
  TrainResult result{TapNet::Create(data.arch, DeriveSeed(config.seed, streams::kInit)),
                     GammaMixer(data.arch.taps.size()),
                     {},
                     {}};
  TapNet& net = result.net;
  GammaMixer& mixer = result.mixer;
  SgdMomentum optimizer(static_cast<float>(config.momentum));
  std::vector<Parameter*> params;
  for (Parameter& p : net.params()) params.push_back(&p);
  if (config.alpha > 0.0) params.push_back(&mixer.logits());

  std::mt19937_64 shuffle_rng = MakeRng(config.seed, streams::kShuffle);
  const bool use_pairs = config.pair_batch > 0;
  std::optional<PairSampler> sampler;
  std::vector<IndexPair> frozen;
  if (use_pairs) {
    sampler.emplace(data.target, config.seed);
    if (config.freeze_pairs) frozen = sampler->Sample(config.pair_batch);
  }

  const std::size_t n = data.train.size();
  const std::size_t steps_per_epoch = (n + config.batch_size - 1) / config.batch_size;
  const std::uint64_t total_steps = steps_per_epoch * config.epochs;
  const auto decay_step =
      static_cast<std::uint64_t>(std::floor(config.decay_at * static_cast<double>(total_steps)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::uint64_t step = 0;
  for (std::uint64_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochRecord er;
    er.epoch = epoch;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size, ++step) {
      const std::size_t count = std::min<std::size_t>(config.batch_size, n - start);
      const std::span<const std::size_t> idx(order.data() + start, count);
      const std::vector<int> labels = data.train.BatchLabels(idx);
      StepRecord sr;
      sr.step = step;
      sr.epoch = epoch;
      sr.lr = step >= decay_step ? config.lr * 0.1 : config.lr;

      Tape tape;
      const TapOutputs task = net.Forward(tape, tape.Constant(data.train.Batch(idx)));
      const Var task_loss = ops::SoftmaxCrossEntropy(task.logits, labels);
      sr.task_loss = task_loss.value()[0];
      const std::vector<int> predicted = Argmax(task.logits.value());
      for (std::size_t b = 0; b < count; ++b) correct += predicted[b] == labels[b];

      Var loss = task_loss;
      if (use_pairs) {
        const std::vector<IndexPair> pairs =
            config.freeze_pairs ? frozen : sampler->Sample(config.pair_batch);
        try {
          if (config.alpha > 0.0) {
            const Var sim = RegularizationLoss(tape, net, mixer, data, pairs, tp.eps_clamp,
                                                 sr.reg_images);
            sr.sim_loss = sim.value()[0];
            loss = ops::Add(task_loss, ops::Scale(sim, static_cast<float>(config.alpha)));
          } else {
            Tape probe(Tape::Mode::kInference);
            sr.sim_loss =
                RegularizationLoss(probe, net, mixer, data, pairs, tp.eps_clamp, sr.reg_images)
                    .value()[0];
          }
        } catch (const Error& e) {
          // Inputs were validated up front, so a degenerate similarity here
          // means the features collapsed during training.
          const ErrorCode code =
              e.code() == ErrorCode::kInvalidArgument ? ErrorCode::kNumeric : e.code();
          Fail(code, "step " + std::to_string(step) + ": " + e.what());
        }
      }
      sr.total_loss = loss.value()[0];
      if (!std::isfinite(sr.total_loss)) {
        Fail(ErrorCode::kNumeric, "non-finite loss at step " + std::to_string(step));
      }
      const GradientMap grads = tape.Backward(loss);
      try {
        optimizer.Step(params, grads, static_cast<float>(sr.lr));
      } catch (const Error& e) {
        Fail(e.code(), "step " + std::to_string(step) + ": " + e.what());
      }

      er.task_loss += sr.task_loss;
      er.sim_loss += sr.sim_loss;
      ++er.steps;
      result.steps.push_back(sr);
      if (callbacks.on_step) callbacks.on_step(sr);
      if (callbacks.log && config.log_steps > 0 && step % config.log_steps == 0) {
        *callbacks.log << StepJson(sr).dump() << "\n";
      }
    }
    er.task_loss /= static_cast<double>(er.steps);
    er.sim_loss /= static_cast<double>(er.steps);
    er.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    er.test_accuracy = Evaluate(net, data.test);
    er.gamma = mixer.Weights();
    result.epochs.push_back(er);
    if (callbacks.on_epoch) callbacks.on_epoch(er);
    if (callbacks.log) *callbacks.log << EpochJson(er).dump() << "\n";
  }
  if (callbacks.log) callbacks.log->flush();
  return result;
}

double Evaluate(const TapNet& net, const LabeledImageSet& set, const ImageTransform& transform,
                std::uint64_t seed) {
  Require(set.size() > 0, ErrorCode::kInvalidArgument, "cannot evaluate on an empty dataset");
  const std::uint64_t base = DeriveSeed(seed, streams::kEval);
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < set.size(); start += kEvalBatch) {
    const std::size_t count = std::min(kEvalBatch, set.size() - start);
    idx.resize(count);
    std::iota(idx.begin(), idx.end(), start);
    Tensor batch = set.Batch(idx);
    if (transform) {
      for (std::size_t b = 0; b < count; ++b) {
        std::mt19937_64 rng(DeriveSeed(base, start + b));
        transform(batch.Row(b), rng);
      }
    }
    const std::vector<int> predicted = net.Predict(batch);
    for (std::size_t b = 0; b < count; ++b) correct += predicted[b] == set.labels[start + b];
  }
  return static_cast<double>(correct) / static_cast<double>(set.size());
}

}  // namespace pixreg
