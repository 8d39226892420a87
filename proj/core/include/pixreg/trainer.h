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


#ifndef PIXREG_TRAINER_H_
#define PIXREG_TRAINER_H_

#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <span>
#include <vector>

#include "pixreg/config.h"
#include "pixreg/datasets.h"
#include "pixreg/mixer.h"
#include "pixreg/similarity.h"
#include "pixreg/tapnet.h"
#include "pixreg/target.h"

namespace pixreg {

// Datasets, regularization images, target and architecture for one run,
// derived deterministically from a config.
struct TrainData {
  LabeledImageSet train;
  LabeledImageSet test;
  LabeledImageSet reg;
  SimilarityTarget target;
  Architecture arch;
};

TrainData PrepareData(const ExperimentConfig& config);

// Draws regularization pairs uniformly among the pairs the target's mask
// admits. Sparse masks are enumerated once; dense ones use rejection.
class PairSampler {
 public:
  PairSampler(const SimilarityTarget& target, std::uint64_t seed);
  std::vector<IndexPair> Sample(std::size_t k);

 private:
  const SimilarityTarget* target_;
  std::mt19937_64 rng_;
  std::vector<IndexPair> listed_;
};

struct StepRecord {
  std::uint64_t step = 0;
  std::uint64_t epoch = 0;
  double lr = 0.0;
  double task_loss = 0.0;
  double sim_loss = 0.0;
  double total_loss = 0.0;
  std::uint64_t reg_images = 0;  // regularization images forwarded this step
};

struct EpochRecord {
  std::uint64_t epoch = 0;
  std::uint64_t steps = 0;
  double train_accuracy = 0.0;  // running accuracy over the epoch's batches
  double test_accuracy = 0.0;
  double task_loss = 0.0;       // epoch means
  double sim_loss = 0.0;
  std::vector<double> gamma;
};

struct TrainCallbacks {
  std::function<void(const StepRecord&)> on_step;
  std::function<void(const EpochRecord&)> on_epoch;
  // JSON lines: {"type":"step",...} every config.log_steps steps and
  // {"type":"epoch",...} after every epoch.
  std::ostream* log = nullptr;
};

struct TrainResult {
  TapNet net;
  GammaMixer mixer;
  std::vector<EpochRecord> epochs;
  std::vector<StepRecord> steps;
};

// L = L_task + alpha * L_sim, one backward pass per step. With alpha = 0 the
// similarity loss is still evaluated for the log but stays off the tape.
TrainResult Train(const ExperimentConfig& config, const TrainData& data,
                  const TrainCallbacks& callbacks = {});

// In-place perturbation of one image's pixels.
using ImageTransform = std::function<void(std::span<float> image, std::mt19937_64& rng)>;

// Fraction of argmax-correct predictions. A transform sees a generator
// seeded from (seed, image index), so results do not depend on batching.
double Evaluate(const TapNet& net, const LabeledImageSet& set, const ImageTransform& transform = {},
                std::uint64_t seed = 0);

}  // namespace pixreg

#endif  // PIXREG_TRAINER_H_
