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

// Run-level plumbing shared by the CLI, the matrix runner and the tests:
// everything a RunConfig determines, from the corpus to a trained model.

#ifndef DELIB_EXPERIMENT_H_
#define DELIB_EXPERIMENT_H_

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "delib/asr_stub.h"
#include "delib/config.h"
#include "delib/datagen.h"
#include "delib/model.h"
#include "delib/tokenizer.h"
#include "delib/training.h"

namespace delib {

// Builtin grammar, error channel at asr.target_wer, seeded split. The train
// split gets audio from data.train_channel; valid and test always get
// natural audio.
DatasetSplits generate_dataset(const RunConfig& config);

// train.jsonl, valid.jsonl, test.jsonl under `dir`.
void save_dataset(const DatasetSplits& splits, const std::string& dir);
DatasetSplits load_dataset(const std::string& dir);

// Pieces from the training references; ontology from the builtin grammar.
Vocabulary build_vocabulary(const std::vector<UtteranceRecord>& train, size_t text_pieces);

AsrStub make_stub(const RunConfig& config, const Vocabulary& vocab);

// config.train with the derived training seed.
TrainConfig train_config(const RunConfig& config);

std::unique_ptr<DeliberationModel> make_model(const RunConfig& config, const Vocabulary& vocab);

// Loads a checkpoint into a fresh model; the stored vocabulary digest is
// returned through `vocab_digest`.
std::unique_ptr<DeliberationModel> load_model(const RunConfig& config, const Vocabulary& vocab,
                                              const std::string& checkpoint_path,
                                              uint64_t* vocab_digest);

struct GradcheckResult {
  double max_rel_error = 0.0;
  size_t parameters = 0;  // scalars checked
  double seconds = 0.0;
};

// Finite-difference check of the full label-smoothed sequence loss over
// every trainable scalar of a preset model, on random frozen inputs.
GradcheckResult gradcheck_model(std::string_view preset, Modality modality, uint64_t seed,
                                size_t vocab_size = 24);

void ensure_dir(const std::string& dir);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace delib

#endif  // DELIB_EXPERIMENT_H_
