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

// Frozen first-pass recognizer stand-in. The text encoder plays the role of
// a transducer's prediction network (a recurrent layer over hypothesis
// tokens) and the audio encoder the role of its acoustic encoder (a strided
// convolution stack with total stride 4). Both are built from a seed and
// never trained. The error channel turns reference transcripts into
// first-pass hypotheses.

#ifndef DELIB_ASR_STUB_H_
#define DELIB_ASR_STUB_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "delib/nn.h"
#include "delib/tensor.h"

namespace delib {

inline constexpr size_t kAudioStride = 4;

// Tier 1 pairs a wider convolution stack with a low-WER channel, tier 2 a
// narrow, bottlenecked stack with a high-WER channel.
enum class AsrTier { kTier1, kTier2 };

class FrozenTextEncoder {
 public:
  FrozenTextEncoder(size_t vocab_size, size_t dim, uint64_t seed);

  // T x D recurrent states, one per token. Throws kIdOutOfRange.
  Tensor embed(std::span<const int> ids) const;

  size_t dim() const { return dim_; }
  const ParameterSet& parameters() const { return params_; }

 private:
  size_t dim_;
  ParameterSet params_{false};
  Tensor table_;      // vocab x D
  Tensor input_;      // D x D
  Tensor recurrent_;  // D x D
  Tensor bias_;       // 1 x D
};

class FrozenAudioEncoder {
 public:
  FrozenAudioEncoder(size_t feature_dim, size_t dim, AsrTier tier, uint64_t seed);

  // frames x F -> ceil(frames / 4) x D. Throws kEmptyAudio.
  Tensor embed(const Tensor& frames) const;

  size_t dim() const { return dim_; }
  size_t feature_dim() const { return feature_dim_; }
  const ParameterSet& parameters() const { return params_; }

 private:
  struct Conv {
    Tensor weight;  // (3 * in) x out, rows ordered by tap then channel
    Tensor bias;    // 1 x out
    size_t stride;
  };

  size_t feature_dim_;
  size_t dim_;
  ParameterSet params_{false};
  std::vector<Conv> layers_;
};

struct AsrStub {
  FrozenTextEncoder text;
  FrozenAudioEncoder audio;

  AsrStub(size_t vocab_size, size_t dim, size_t feature_dim, AsrTier tier, uint64_t seed);
  // Concatenated raw bytes of all frozen parameters.
  std::string frozen_bytes() const;
  std::vector<Tensor> frozen_tensors() const;
};

using ConfusionPools = std::map<std::string, std::vector<std::string>>;

// "word<TAB>alt1,alt2,..." per line.
ConfusionPools parse_confusion_pools(std::string_view text);
std::string format_confusion_pools(const ConfusionPools& pools);
ConfusionPools load_confusion_pools(const std::string& path);

struct AsrErrorModel {
  double substitution_rate = 0.0;
  double deletion_rate = 0.0;
  double insertion_rate = 0.0;
  ConfusionPools confusion_pools;
  std::vector<std::string> fillers;

  // Splits a target word error rate 70/15/15 between substitutions,
  // deletions and insertions.
  static AsrErrorModel for_target_wer(double target, ConfusionPools pools,
                                      std::vector<std::string> fillers);
  // Throws kFractionOutOfRange on rates outside [0, 1] or summing above 1.
  void validate() const;
  // Probability that a reference of `words` words comes out unchanged.
  double clean_probability(size_t words) const;
};

// Per reference word: substitute (confusion pool entry when the word has
// one, else a character-level perturbation), delete, or keep; after each
// word a filler may be inserted. Rates of zero give back the reference. If
// every word was deleted the first reference word is kept so the hypothesis
// is never empty.
std::vector<std::string> corrupt(std::span<const std::string> ref, const AsrErrorModel& model,
                                 uint64_t seed);

// Word-level Levenshtein distance with unit costs.
size_t edit_distance(std::span<const std::string> hyp, std::span<const std::string> ref);
// edit_distance / |ref|; throws kEmptyReference.
double wer(std::span<const std::string> hyp, std::span<const std::string> ref);

// Perturbs one character of `word` (replace, drop, insert or swap); the
// result always differs from the input.
std::string perturb_word(std::string_view word, Rng& rng);

}  // namespace delib

#endif  // DELIB_ASR_STUB_H_
