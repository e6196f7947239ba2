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

#include "delib/experiment.h"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "delib/checkpoint.h"
#include "delib/error.h"

namespace delib {

DatasetSplits generate_dataset(const RunConfig& config) {
  const Grammar grammar = Grammar::builtin();
  // Every datagen stage salts the seed with its own tag.
  const uint64_t seed = config.data_seed();
  std::vector<UtteranceRecord> records =
      generate_corpus(grammar, config.data.n, config.data.compositional_fraction, seed);
  const AsrErrorModel channel = AsrErrorModel::for_target_wer(
      config.asr.target_wer, build_confusion_pools(grammar, seed), insertion_fillers());
  attach_hypotheses(records, channel, seed);
  DatasetSplits splits = split(std::move(records), config.data.ratios, seed);
  attach_audio(splits.train, config.data.train_channel, seed, config.data.audio);
  attach_audio(splits.valid, FeatureChannel::kNatural, seed, config.data.audio);
  attach_audio(splits.test, FeatureChannel::kNatural, seed, config.data.audio);
  return splits;
}

void save_dataset(const DatasetSplits& splits, const std::string& dir) {
  ensure_dir(dir);
  write_jsonl(dir + "/train.jsonl", splits.train);
  write_jsonl(dir + "/valid.jsonl", splits.valid);
  write_jsonl(dir + "/test.jsonl", splits.test);
}

DatasetSplits load_dataset(const std::string& dir) {
  return {read_jsonl(dir + "/train.jsonl"), read_jsonl(dir + "/valid.jsonl"),
          read_jsonl(dir + "/test.jsonl")};
}

Vocabulary build_vocabulary(const std::vector<UtteranceRecord>& train, size_t text_pieces) {
  std::vector<std::string> corpus;
  corpus.reserve(train.size());
  for (const UtteranceRecord& r : train) corpus.push_back(join_words(r.reference_text));
  return Vocabulary::build(corpus, text_pieces, Grammar::builtin().ontology_tokens());
}

AsrStub make_stub(const RunConfig& config, const Vocabulary& vocab) {
  return AsrStub(vocab.size(), config.asr.dim, config.data.audio.feature_dim, config.asr.tier,
                 config.stub_seed());
}

TrainConfig train_config(const RunConfig& config) {
  TrainConfig t = config.train;
  t.seed = config.train_seed();
  return t;
}

std::unique_ptr<DeliberationModel> make_model(const RunConfig& config, const Vocabulary& vocab) {
  return std::make_unique<DeliberationModel>(config.model_config(vocab.size()),
                                             config.model_seed());
}

std::unique_ptr<DeliberationModel> load_model(const RunConfig& config, const Vocabulary& vocab,
                                              const std::string& checkpoint_path,
                                              uint64_t* vocab_digest) {
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  auto model = make_model(config, vocab);
  restore_parameters(ckpt, model->parameters());
  if (vocab_digest != nullptr) *vocab_digest = ckpt.vocab_digest;
  return model;
}

GradcheckResult gradcheck_model(std::string_view preset, Modality modality, uint64_t seed,
                                size_t vocab_size) {
  const auto start = std::chrono::steady_clock::now();
  const ModelConfig config = ModelConfig::preset(preset, modality, vocab_size);
  DeliberationModel model(config, mix_seed(seed, "model"));
  Rng rng(mix_seed(seed, "inputs"));
  const int lo = Vocabulary::kNumSpecials;
  const int hi = static_cast<int>(vocab_size) - 1;

  ModelInputs in;
  for (int i = 0; i < 5; ++i) in.hypothesis.push_back(static_cast<int>(rng.between(lo, hi)));
  in.hypothesis[3] = in.hypothesis[1];  // a repeated token exercises the scatter
  in.text = normal_init(in.hypothesis.size(), config.asr_dim, 1.0, rng);
  in.audio = normal_init(3, config.asr_dim, 1.0, rng);
  std::vector<int> target{Vocabulary::kBos, in.hypothesis[0], static_cast<int>(rng.between(lo, hi)),
                          in.hypothesis[1], Vocabulary::kEos};

  std::vector<Tensor> params = model.parameters().tensors();
  GradcheckResult r;
  r.parameters = model.param_count();
  r.max_rel_error = gradcheck([&] { return model.sequence_loss(in, target, 0.1); }, params, 1e-5, 0,
                              mix_seed(seed, "gradcheck"));
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << contents;
}

}  // namespace delib
