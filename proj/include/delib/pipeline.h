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

// Glue between records, the frozen stub and the second-pass model.

#ifndef DELIB_PIPELINE_H_
#define DELIB_PIPELINE_H_

#include <string>
#include <vector>

#include "delib/asr_stub.h"
#include "delib/model.h"
#include "delib/record.h"
#include "delib/tokenizer.h"

namespace delib {

class Featurizer {
 public:
  Featurizer(const AsrStub& stub, const Vocabulary& vocab) : stub_(stub), vocab_(vocab) {}

  std::vector<int> text_ids(const std::vector<std::string>& words) const;

  // Frozen embeddings for one record. `use_hypothesis` picks the first-pass
  // text over the reference; `audio` replaces the record's features (e.g.
  // after masking). Inputs the modality ignores are left empty.
  ModelInputs inputs(const UtteranceRecord& record, bool use_hypothesis, Modality modality,
                     const Tensor* audio = nullptr) const;

  const AsrStub& stub() const { return stub_; }
  const Vocabulary& vocab() const { return vocab_; }

 private:
  const AsrStub& stub_;
  const Vocabulary& vocab_;
};

// Greedy decode from the record's first-pass hypothesis and audio.
std::string predict_annotation(const DeliberationModel& model, const Featurizer& featurizer,
                               const UtteranceRecord& record);

// Fraction of records whose prediction exactly matches the target.
double exact_match_rate(const DeliberationModel& model, const Featurizer& featurizer,
                        const std::vector<UtteranceRecord>& records);

}  // namespace delib

#endif  // DELIB_PIPELINE_H_
