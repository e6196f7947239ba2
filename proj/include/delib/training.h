// Copyright 2026 The DelibSLU Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Training pairs, feature masking and the optimization loop.

#ifndef DELIB_TRAINING_H_
#define DELIB_TRAINING_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "delib/model.h"
#include "delib/nn.h"
#include "delib/pipeline.h"
#include "delib/record.h"

namespace delib {

// Hyp trains on first-pass text, Ref on the reference, Union on the
// reference plus one extra hypothesis copy of every errorful record.
enum class TextStrategy { kHyp, kRef, kUnion };

std::string_view to_string(TextStrategy s);
TextStrategy parse_strategy(std::string_view s);

struct TrainingPair {
  size_t record = 0;
  bool use_hypothesis = false;
};

std::vector<TrainingPair> build_pairs(const std::vector<UtteranceRecord>& records,
                                      TextStrategy strategy);

struct SpecAugmentPolicy {
  size_t time_masks = 1;
  size_t max_time_width = 10;
  size_t feature_masks = 1;
  size_t max_feature_width = 4;
  // Widths are drawn uniformly from [0, max] unless this is set, in which
  // case every mask is exactly max wide (clipped to the input).
  bool exact_widths = false;

  bool is_identity() const {
    return (time_masks == 0 || max_time_width == 0) &&
           (feature_masks == 0 || max_feature_width == 0);
  }
  // Expected fraction of zeroed cells for a frames x features input.
  double expected_masked_fraction(size_t frames, size_t features) const;
};

// Zeroes sampled time bands and feature bands; a pure function of its
// arguments.
Tensor spec_augment(const Tensor& features, const SpecAugmentPolicy& policy, uint64_t seed);

struct TrainConfig {
  TextStrategy strategy = TextStrategy::kUnion;
  size_t epochs = 30;
  size_t batch_size = 32;
  double learning_rate = 3e-4;
  double label_smoothing = 0.1;
  size_t patience = 5;  // epochs without a better validation EM; 0 disables
  SpecAugmentPolicy spec_augment;
  uint64_t seed = 1;

  // Throws kFractionOutOfRange / kUsage.
  void validate(size_t feature_dim) const;
};

// Adaptive moment estimation over the trainable tensors of a parameter set.
// Tensors that do not require gradients get no state.
class Adam {
 public:
  explicit Adam(const ParameterSet& params, double learning_rate, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);

  // Applies one update from the accumulated gradients, then clears them.
  void step();

  bool tracks(const Tensor& t) const;
  size_t tracked_count() const { return slots_.size(); }
  std::vector<const TensorNode*> tracked_nodes() const;
  uint64_t steps() const { return steps_; }

 private:
  struct Slot {
    Tensor param;
    std::vector<double> m;
    std::vector<double> v;
  };

  std::vector<Slot> slots_;
  double lr_, beta1_, beta2_, epsilon_;
  uint64_t steps_ = 0;
};

struct Example {
  ModelInputs inputs;
  std::vector<int> target;  // <s> ... </s>
};

// Sum of per-utterance label-smoothed losses divided by the number of
// scored target steps. Throws kEmptyBatch.
Tensor forward_teacher_forced(const DeliberationModel& model, std::span<const Example> batch,
                              double label_smoothing);

struct EpochStats {
  size_t epoch = 0;
  double train_loss = 0.0;  // mean over the epoch's batches
  double valid_em = 0.0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> epochs;
  size_t best_epoch = 0;
  double best_valid_em = -1.0;
  uint64_t steps = 0;
  bool early_stopped = false;
  std::vector<double> step_losses;
  // Nodes the optimizer held state for.
  std::vector<const TensorNode*> optimized;
};

// Trains `model` in place. After the last epoch the model holds the
// best-validation parameters as stored (float32) in the checkpoint. With a
// non-empty `out_dir` the run writes best.ckpt, metrics.log (deterministic)
// and timing.log (wall clock). Throws kNonFiniteLoss.
TrainResult train(DeliberationModel& model, const Featurizer& featurizer,
                  const std::vector<UtteranceRecord>& train_set,
                  const std::vector<UtteranceRecord>& valid_set, const TrainConfig& config,
                  const std::string& out_dir = {});

}  // namespace delib

#endif  // DELIB_TRAINING_H_
