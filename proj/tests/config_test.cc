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

#include "delib/config.h"

#include <gtest/gtest.h>

#include <set>

#include "test_util.h"

namespace delib {
namespace {

using testing::code_of;

TEST(RunConfig, IniRoundTrip) {
  RunConfig c = RunConfig::defaults("toy");
  c.seed = 17;
  c.data.n = 123;
  c.data.train_channel = FeatureChannel::kMismatched;
  c.asr.tier = AsrTier::kTier2;
  c.model.modality = Modality::kAudioOnly;
  c.train.strategy = TextStrategy::kHyp;
  c.train.learning_rate = 2.5e-4;
  c.train.spec_augment.exact_widths = true;
  c.data_dir = "/tmp/some data";
  c.matrix.seeds = {4, 5};
  const std::string text = c.to_ini();
  const RunConfig back = RunConfig::from_ini(text);
  EXPECT_EQ(back.to_ini(), text);
  EXPECT_EQ(back.digest(), c.digest());
  EXPECT_EQ(back.data_dir, "/tmp/some data");
  EXPECT_EQ(back.model.modality, Modality::kAudioOnly);
  EXPECT_EQ(back.train.learning_rate, 2.5e-4);

  const std::string path = testing::fresh_dir("config") + "/config.ini";
  c.save(path);
  EXPECT_EQ(RunConfig::load(path).to_ini(), text);
}

TEST(RunConfig, MissingKeysKeepDefaults) {
  const RunConfig c = RunConfig::from_ini("[run]\nseed = 9\n");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.data.n, RunConfig::defaults().data.n);
  EXPECT_EQ(c.matrix.cells, RunConfig::defaults().matrix.cells);
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
  EXPECT_EQ(code_of([] { RunConfig::from_ini("[run]\nsead = 9\n"); }), ErrorCode::kUsage);
  EXPECT_EQ(code_of([] { RunConfig::from_ini("[nope]\nseed = 9\n"); }), ErrorCode::kUsage);
  EXPECT_EQ(code_of([] { RunConfig::from_ini("[run]\nseed = nine\n"); }), ErrorCode::kUsage);
  EXPECT_EQ(code_of([] { RunConfig::from_ini("[train]\nlearning_rate = fast\n"); }), ErrorCode::kUsage);
  EXPECT_EQ(code_of([] { RunConfig::load("/nonexistent/config.ini"); }), ErrorCode::kIo);
}

TEST(RunConfig, DigestIgnoresPathsAndJobs) {
  RunConfig a = RunConfig::defaults();
  RunConfig b = a;
  b.data_dir = "/elsewhere";
  b.vocab_path = "/v.txt";
  b.checkpoint_path = "/c.ckpt";
  b.jobs = 8;
  EXPECT_EQ(a.digest(), b.digest());
  b.train.epochs += 1;
  EXPECT_NE(a.digest(), b.digest());
  RunConfig c = a;
  c.seed = 2;
  EXPECT_NE(a.digest(), c.digest());
}

TEST(RunConfig, DerivedSeedsAreDistinct) {
  const RunConfig c = RunConfig::defaults();
  const std::set<uint64_t> seeds{c.data_seed(), c.stub_seed(), c.model_seed(), c.train_seed()};
  EXPECT_EQ(seeds.size(), 4u);
}

TEST(RunConfig, PresetKeepsModality) {
  RunConfig c = RunConfig::defaults();
  c.model.modality = Modality::kTextOnly;
  c.apply_preset("paper-scale");
  EXPECT_EQ(c.model.dim, 240u);
  EXPECT_EQ(c.asr.dim, 256u);
  EXPECT_EQ(c.preset, "paper-scale");
}

TEST(CellSpec, ParseAndKey) {
  const CellSpec c = CellSpec::parse("tier2:audio:ref:mismatched");
  EXPECT_EQ(c.tier, AsrTier::kTier2);
  EXPECT_EQ(c.modality, Modality::kAudioOnly);
  EXPECT_EQ(c.strategy, TextStrategy::kRef);
  EXPECT_EQ(c.channel, FeatureChannel::kMismatched);
  EXPECT_EQ(CellSpec::parse(c.key()), c);
  EXPECT_EQ(code_of([] { CellSpec::parse("tier1:fusion:union"); }), ErrorCode::kUsage);
  EXPECT_EQ(code_of([] { CellSpec::parse("tier3:fusion:union:natural"); }), ErrorCode::kUsage);
}

}  // namespace
}  // namespace delib
