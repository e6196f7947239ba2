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

#include "delib/pipeline.h"

#include "delib/parse.h"

namespace delib {

std::vector<int> Featurizer::text_ids(const std::vector<std::string>& words) const {
  return vocab_.encode(join_words(words));
}

ModelInputs Featurizer::inputs(const UtteranceRecord& record, bool use_hypothesis,
                               Modality modality, const Tensor* audio) const {
  ModelInputs in;
  if (modality != Modality::kAudioOnly) {
    in.hypothesis = text_ids(use_hypothesis ? record.hypothesis_text : record.reference_text);
    in.text = stub_.text.embed(in.hypothesis);
  }
  if (modality != Modality::kTextOnly) {
    in.audio = stub_.audio.embed(audio != nullptr ? *audio : record.audio);
  }
  return in;
}

std::string predict_annotation(const DeliberationModel& model, const Featurizer& featurizer,
                               const UtteranceRecord& record) {
  const ModelInputs in = featurizer.inputs(record, true, model.config().modality);
  return featurizer.vocab().decode_annotation(model.greedy_decode(in));
}

double exact_match_rate(const DeliberationModel& model, const Featurizer& featurizer,
                        const std::vector<UtteranceRecord>& records) {
  if (records.empty()) return 0.0;
  size_t hits = 0;
  for (const UtteranceRecord& r : records) {
    hits += exact_match(predict_annotation(model, featurizer, r), r.target_annotation) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

}  // namespace delib
