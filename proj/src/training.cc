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

#include "delib/training.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "delib/checkpoint.h"
#include "delib/error.h"
#include "delib/random.h"

namespace delib {
namespace {

// Probability that each position of a length-n axis is covered by one
// mask of width w ~ U{0..W} (or exactly W), start ~ U{0..n-w}.
std::vector<double> coverage(size_t n, size_t max_width, bool exact) {
  std::vector<double> p(n, 0.0);
  const size_t cap = std::min(max_width, n);
  const size_t lo = exact ? cap : 0;
  const double pw = 1.0 / static_cast<double>(cap - lo + 1);
  for (size_t w = lo; w <= cap; ++w) {
    if (w == 0) continue;
    const double starts = static_cast<double>(n - w + 1);
    for (size_t t = 0; t < n; ++t) {
      const size_t first = t + 1 >= w ? t + 1 - w : 0;
      const size_t last = std::min(t, n - w);
      if (last >= first) p[t] += pw * static_cast<double>(last - first + 1) / starts;
    }
  }
  return p;
}

double mean_uncovered(size_t n, size_t masks, size_t max_width, bool exact) {
  if (n == 0) return 1.0;
  double total = 0.0;
  for (double p : coverage(n, max_width, exact)) total += std::pow(1.0 - p, static_cast<double>(masks));
  return total / static_cast<double>(n);
}

std::pair<size_t, size_t> draw_band(size_t n, size_t max_width, bool exact, Rng& rng) {
  const size_t cap = std::min(max_width, n);
  const size_t w = exact ? cap : static_cast<size_t>(rng.below(cap + 1));
  const size_t start = static_cast<size_t>(rng.below(n - w + 1));
  return {start, w};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << text;
}

std::string format(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

}  // namespace

std::string_view to_string(TextStrategy s) {
  switch (s) {
    case TextStrategy::kHyp: return "hyp";
    case TextStrategy::kRef: return "ref";
    case TextStrategy::kUnion: return "union";
  }
  return "unknown";
}

TextStrategy parse_strategy(std::string_view s) {
  if (s == "hyp") return TextStrategy::kHyp;
  if (s == "ref") return TextStrategy::kRef;
  if (s == "union") return TextStrategy::kUnion;
  throw Error(ErrorCode::kUsage, "unknown text strategy '" + std::string(s) + "'");
}

std::vector<TrainingPair> build_pairs(const std::vector<UtteranceRecord>& records,
                                      TextStrategy strategy) {
  std::vector<TrainingPair> pairs;
  pairs.reserve(records.size() * (strategy == TextStrategy::kUnion ? 2 : 1));
  for (size_t i = 0; i < records.size(); ++i) {
    pairs.push_back({i, strategy == TextStrategy::kHyp});
  }
  if (strategy == TextStrategy::kUnion) {
    for (size_t i = 0; i < records.size(); ++i) {
      if (records[i].has_asr_error) pairs.push_back({i, true});
    }
  }
  return pairs;
}

double SpecAugmentPolicy::expected_masked_fraction(size_t frames, size_t features) const {
  const double rows = mean_uncovered(frames, time_masks, max_time_width, exact_widths);
  const double cols = mean_uncovered(features, feature_masks, max_feature_width, exact_widths);
  return 1.0 - rows * cols;
}

Tensor spec_augment(const Tensor& features, const SpecAugmentPolicy& policy, uint64_t seed) {
  Tensor out = features.detach();
  if (policy.is_identity() || out.size() == 0) return out;
  Rng rng(seed);
  const size_t frames = out.rows(), dims = out.cols();
  auto v = out.mutable_values();
  for (size_t m = 0; m < policy.time_masks; ++m) {
    const auto [start, w] = draw_band(frames, policy.max_time_width, policy.exact_widths, rng);
    std::fill(v.begin() + static_cast<std::ptrdiff_t>(start * dims),
              v.begin() + static_cast<std::ptrdiff_t>((start + w) * dims), 0.0);
  }
  for (size_t m = 0; m < policy.feature_masks; ++m) {
    const auto [start, w] = draw_band(dims, policy.max_feature_width, policy.exact_widths, rng);
    for (size_t t = 0; t < frames; ++t) {
      std::fill(v.begin() + static_cast<std::ptrdiff_t>(t * dims + start),
                v.begin() + static_cast<std::ptrdiff_t>(t * dims + start + w), 0.0);
    }
  }
  return out;
}

void TrainConfig::validate(size_t feature_dim) const {
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0)) {
    throw Error(ErrorCode::kFractionOutOfRange,
                "label smoothing " + std::to_string(label_smoothing));
  }
  if (batch_size == 0) throw Error(ErrorCode::kUsage, "batch size must be positive");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kUsage, "learning rate must be positive");
  if (spec_augment.max_feature_width > feature_dim) {
    throw Error(ErrorCode::kUsage, "feature mask wider than the " + std::to_string(feature_dim) +
                                       " feature channels");
  }
}

Adam::Adam(const ParameterSet& params, double learning_rate, double beta1, double beta2,
           double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  for (const NamedTensor& e : params.entries()) {
    if (!e.tensor.requires_grad()) continue;
    slots_.push_back({e.tensor, std::vector<double>(e.tensor.size(), 0.0),
                      std::vector<double>(e.tensor.size(), 0.0)});
  }
}

void Adam::step() {
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  for (Slot& s : slots_) {
    if (!s.param.has_grad()) continue;
    auto g = s.param.grad();
    auto w = s.param.mutable_values();
    for (size_t i = 0; i < w.size(); ++i) {
      s.m[i] = beta1_ * s.m[i] + (1.0 - beta1_) * g[i];
      s.v[i] = beta2_ * s.v[i] + (1.0 - beta2_) * g[i] * g[i];
      w[i] -= lr_ * (s.m[i] / c1) / (std::sqrt(s.v[i] / c2) + epsilon_);
    }
    s.param.zero_grad();
  }
}

bool Adam::tracks(const Tensor& t) const {
  return std::any_of(slots_.begin(), slots_.end(),
                     [&](const Slot& s) { return s.param.same_node(t); });
}

std::vector<const TensorNode*> Adam::tracked_nodes() const {
  std::vector<const TensorNode*> out;
  for (const Slot& s : slots_) out.push_back(s.param.node());
  return out;
}

Tensor forward_teacher_forced(const DeliberationModel& model, std::span<const Example> batch,
                              double label_smoothing) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "no utterances in batch");
  std::vector<Tensor> losses;
  size_t steps = 0;
  for (const Example& ex : batch) {
    losses.push_back(model.sequence_loss(ex.inputs, ex.target, label_smoothing));
    steps += ex.target.size() - 1;
  }
  Tensor total = losses.front();
  for (size_t i = 1; i < losses.size(); ++i) total = ops::add(total, losses[i]);
  return ops::scale(total, 1.0 / static_cast<double>(steps));
}

TrainResult train(DeliberationModel& model, const Featurizer& featurizer,
                  const std::vector<UtteranceRecord>& train_set,
                  const std::vector<UtteranceRecord>& valid_set, const TrainConfig& config,
                  const std::string& out_dir) {
  config.validate(featurizer.stub().audio.feature_dim());
  const Modality modality = model.config().modality;
  const Vocabulary& vocab = featurizer.vocab();
  const std::vector<TrainingPair> pairs = build_pairs(train_set, config.strategy);
  if (pairs.empty()) throw Error(ErrorCode::kEmptyBatch, "empty training set");

  // Frozen text embeddings and targets do not change between epochs.
  std::vector<Example> cached(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    const UtteranceRecord& r = train_set[pairs[i].record];
    cached[i].inputs = featurizer.inputs(r, pairs[i].use_hypothesis, modality);
    cached[i].target = vocab.encode_annotation(r.target_annotation);
  }
  const bool augment = modality != Modality::kTextOnly && !config.spec_augment.is_identity();

  Adam adam(model.parameters(), config.learning_rate);
  TrainResult result;
  std::string metrics, timing, best_bytes;
  size_t since_best = 0;
  for (size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<size_t> order(pairs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng(mix_seed(config.seed + epoch, "shuffle")).shuffle(order);

    double loss_sum = 0.0;
    size_t batches = 0;
    for (size_t b = 0; b < order.size(); b += config.batch_size) {
      const size_t end = std::min(order.size(), b + config.batch_size);
      std::vector<Example> batch;
      batch.reserve(end - b);
      for (size_t k = b; k < end; ++k) {
        Example ex = cached[order[k]];
        if (augment) {
          const UtteranceRecord& r = train_set[pairs[order[k]].record];
          const uint64_t seed = mix_seed(mix_seed(config.seed, result.steps), k - b);
          const Tensor masked = spec_augment(r.audio, config.spec_augment, seed);
          ex.inputs.audio = featurizer.stub().audio.embed(masked);
        }
        batch.push_back(std::move(ex));
      }
      Tape tape;
      double value = 0.0;
      {
        TapeScope scope(tape);
        const Tensor loss = forward_teacher_forced(model, batch, config.label_smoothing);
        value = loss.item();
        if (!std::isfinite(value)) {
          throw Error(ErrorCode::kNonFiniteLoss,
                      format("loss %g at epoch %zu step %llu (batch of %zu)", value, epoch,
                             static_cast<unsigned long long>(result.steps), batch.size()));
        }
        tape.backward(loss);
      }
      adam.step();
      ++result.steps;
      result.step_losses.push_back(value);
      loss_sum += value;
      ++batches;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(batches);
    stats.valid_em = exact_match_rate(model, featurizer, valid_set);
    stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.epochs.push_back(stats);
    metrics += format("epoch=%zu train_loss=%.6f valid_em=%.4f\n", epoch, stats.train_loss,
                      stats.valid_em);
    timing += format("epoch=%zu wall_seconds=%.3f\n", epoch, stats.wall_seconds);

    if (stats.valid_em > result.best_valid_em) {
      result.best_valid_em = stats.valid_em;
      result.best_epoch = epoch;
      best_bytes = encode_checkpoint(model.parameters(), vocab.digest());
      since_best = 0;
    } else if (config.patience > 0 && ++since_best >= config.patience) {
      result.early_stopped = true;
      break;
    }
  }

  restore_parameters(decode_checkpoint(best_bytes), model.parameters());
  result.optimized = adam.tracked_nodes();
  if (!out_dir.empty()) {
    write_text(out_dir + "/best.ckpt", best_bytes);
    metrics += format("best_epoch=%zu best_valid_em=%.4f\n", result.best_epoch,
                      result.best_valid_em);
    write_text(out_dir + "/metrics.log", metrics);
    write_text(out_dir + "/timing.log", timing);
  }
  return result;
}

}  // namespace delib
