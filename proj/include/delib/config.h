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

// Declarative run description, stored as an INI file:
//
//   [run]     seed, jobs
//   [paths]   data_dir, vocab, checkpoint
//   [data]    corpus size, split ratios, compositional fraction, audio synthesis
//   [asr]     stub tier, width, error-channel WER
//   [vocab]   text_pieces
//   [model]   preset, modality and every ModelConfig field
//   [train]   TrainConfig
//   [matrix]  seeds, cells, per-tier WER
//
// Every randomized step derives its seed from run.seed.

#ifndef DELIB_CONFIG_H_
#define DELIB_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "delib/asr_stub.h"
#include "delib/datagen.h"
#include "delib/model.h"
#include "delib/training.h"

namespace delib {

struct DataConfig {
  size_t n = 2800;
  SplitRatios ratios{5.0 / 7.0, 1.0 / 7.0, 1.0 / 7.0};
  double compositional_fraction = 0.2;
  FeatureChannel train_channel = FeatureChannel::kNatural;
  AudioSynthConfig audio;
};

struct AsrConfig {
  AsrTier tier = AsrTier::kTier1;
  size_t dim = 32;
  double target_wer = 0.2;
};

struct CellSpec {
  AsrTier tier = AsrTier::kTier1;
  Modality modality = Modality::kFusion;
  TextStrategy strategy = TextStrategy::kUnion;
  FeatureChannel channel = FeatureChannel::kNatural;

  // "tier1:fusion:union:natural"
  std::string key() const;
  static CellSpec parse(std::string_view s);
  bool operator==(const CellSpec&) const = default;
};

struct MatrixConfig {
  std::vector<uint64_t> seeds{1, 2, 3};
  std::vector<CellSpec> cells;
  double tier1_wer = 0.2;
  double tier2_wer = 0.35;
};

struct RunConfig {
  uint64_t seed = 1;
  size_t jobs = 1;
  std::string data_dir;
  std::string vocab_path;
  std::string checkpoint_path;
  DataConfig data;
  AsrConfig asr;
  size_t text_pieces = 600;
  std::string preset = "desk";
  ModelConfig model;  // vocab_size is filled in from the vocabulary
  TrainConfig train;
  MatrixConfig matrix;

  // Desk defaults with the given model preset.
  static RunConfig defaults(std::string_view preset = "desk");
  // Replaces the model dimensions with the named preset, keeping modality.
  void apply_preset(std::string_view name);

  std::string to_ini() const;
  // Starts from defaults(); unknown sections or keys raise kUsage.
  static RunConfig from_ini(std::string_view text);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;

  // Digest of everything that affects trained parameters (paths and jobs
  // excluded).
  uint64_t digest() const;

  ModelConfig model_config(size_t vocab_size) const;
  uint64_t data_seed() const { return mix_seed(seed, "data"); }
  uint64_t stub_seed() const { return mix_seed(seed, "asr"); }
  uint64_t model_seed() const { return mix_seed(seed, "model"); }
  uint64_t train_seed() const { return mix_seed(seed, "train"); }
};

std::string_view to_string(AsrTier tier);
AsrTier parse_tier(std::string_view s);

}  // namespace delib

#endif  // DELIB_CONFIG_H_
