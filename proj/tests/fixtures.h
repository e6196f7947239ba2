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

// Small random models and inputs shared by the model tests and the
// acceptance binary.

#ifndef DELIB_TESTS_FIXTURES_H_
#define DELIB_TESTS_FIXTURES_H_

#include <memory>
#include <vector>

#include "delib/model.h"
#include "delib/nn.h"
#include "delib/random.h"
#include "delib/tokenizer.h"

namespace delib::fixtures {

// D = 8 everywhere, two heads where the layer allows it.
inline ModelConfig small_config(Modality modality, size_t vocab_size = 12) {
  ModelConfig c;
  c.asr_dim = 8;
  c.dim = 8;
  c.fusion_heads = 2;
  c.pooling_layers = 2;
  c.pooling_heads = 2;
  c.ffn_dim = 16;
  c.decoder_layers = 1;
  c.decoder_heads = 2;
  c.copy_heads = 1;
  c.modality = modality;
  c.vocab_size = vocab_size;
  c.max_decode_length = 10;
  return c;
}

// Hypothesis ids are plain-text ids (no specials), drawn with repeats.
inline std::vector<int> random_hypothesis(size_t length, size_t vocab_size, Rng& rng) {
  std::vector<int> ids(length);
  const int lo = Vocabulary::kNumSpecials;
  const int span = static_cast<int>(vocab_size) - lo;
  for (int& id : ids) id = lo + static_cast<int>(rng.below(std::min(span, 4)));
  return ids;
}

inline ModelInputs random_inputs(const ModelConfig& c, size_t text_len, size_t audio_len, Rng& rng) {
  ModelInputs in;
  in.hypothesis = random_hypothesis(text_len, c.vocab_size, rng);
  in.text = normal_init(text_len, c.asr_dim, 1.0, rng);
  in.audio = normal_init(audio_len, c.asr_dim, 1.0, rng);
  return in;
}

}  // namespace delib::fixtures

#endif  // DELIB_TESTS_FIXTURES_H_
