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

// Synthetic task-oriented corpora. A grammar lists intents per domain, each
// with carrier templates such as
//
//   "wake me up at {DATE_TIME}"
//   "how long will it take to get to {DESTINATION>GET_EVENT}"
//
// where {SLOT} draws a filler from the slot's lexicon and {SLOT>INTENT}
// nests a full utterance of INTENT under the slot. Annotations keep only
// slot text (carrier words are dropped), so targets read
// "[IN:GET_DIRECTIONS [SL:DESTINATION [IN:GET_EVENT [SL:NAME eagles ] ] ] ]".

#ifndef DELIB_DATAGEN_H_
#define DELIB_DATAGEN_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "delib/asr_stub.h"
#include "delib/parse.h"
#include "delib/random.h"
#include "delib/record.h"

namespace delib {

struct IntentSpec {
  std::string label;
  std::vector<std::string> templates;
};

struct DomainSpec {
  std::string name;
  std::vector<IntentSpec> intents;
};

struct Grammar {
  std::vector<DomainSpec> domains;
  // Slot label -> fillers; a filler may span several words.
  std::map<std::string, std::vector<std::string>> lexicons;

  // Nine domains, 18 intents, 26 slots.
  static Grammar builtin();

  // Throws kMalformedOntologyToken / kFormat on unknown slots or intents,
  // empty lexicons or nested intents that are themselves compositional.
  void validate() const;

  const IntentSpec* find_intent(std::string_view label) const;
  std::vector<std::string> intent_labels() const;
  std::vector<std::string> slot_labels() const;
  // Every word that can appear in an utterance, sorted and unique.
  std::vector<std::string> words() const;
  // Opener for every intent and slot plus the closer.
  std::vector<std::string> ontology_tokens() const;
};

bool is_compositional_template(std::string_view tmpl);

struct Utterance {
  std::vector<std::string> words;
  ParseNode tree;
};

Utterance instantiate(const Grammar& grammar, const IntentSpec& intent, std::string_view tmpl,
                      Rng& rng);

// Records carry ids, reference words and annotations; audio and hypotheses
// are attached separately. Throws kFractionOutOfRange.
std::vector<UtteranceRecord> generate_corpus(const Grammar& grammar, size_t n,
                                             double compositional_fraction, uint64_t seed);

enum class FeatureChannel { kNatural, kMismatched };

std::string_view to_string(FeatureChannel c);
FeatureChannel parse_channel(std::string_view s);

struct AudioSynthConfig {
  size_t feature_dim = 16;
  size_t frames_per_word = 6;
  size_t jitter = 1;  // frames per word drawn from [base - jitter, base + jitter]
  double noise = 0.35;
  // The mismatched channel stands in for synthetic (TTS) training speech:
  // shorter, steadier words, a speaker colouring and a global offset.
  size_t mismatched_frames_per_word = 5;
  size_t mismatched_jitter = 0;
  double mismatched_noise = 0.1;
  double mismatched_base_scale = 0.75;
  double mismatched_voice_scale = 0.6;
  double mismatched_offset_scale = 0.4;
};

// Per word: a word-keyed base vector repeated over the word's frames plus
// per-frame noise, quantized to 1e-4. Throws kEmptyReference on no words.
Tensor synth_audio_features(const std::vector<std::string>& words, FeatureChannel channel,
                            uint64_t seed, const AudioSynthConfig& config = {});

void attach_audio(std::vector<UtteranceRecord>& records, FeatureChannel channel, uint64_t seed,
                  const AudioSynthConfig& config = {});

// hypothesis = corrupt(reference); has_asr_error by normalized inequality.
void attach_hypotheses(std::vector<UtteranceRecord>& records, const AsrErrorModel& model,
                       uint64_t seed);

struct SplitRatios {
  double train = 0.70;
  double valid = 0.15;
  double test = 0.15;
};

struct DatasetSplits {
  std::vector<UtteranceRecord> train;
  std::vector<UtteranceRecord> valid;
  std::vector<UtteranceRecord> test;
};

// Seeded shuffle, then contiguous slices of round(n * ratio) records (the
// test split takes the remainder). Throws kBadRatios.
DatasetSplits split(std::vector<UtteranceRecord> records, const SplitRatios& ratios,
                    uint64_t seed);

// Two perturbations for every grammar word, plus sound-alike pairs where
// the grammar has them.
ConfusionPools build_confusion_pools(const Grammar& grammar, uint64_t seed);

// Words the error channel inserts.
std::vector<std::string> insertion_fillers();

}  // namespace delib

#endif  // DELIB_DATAGEN_H_
