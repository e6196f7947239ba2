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

#include "delib/datagen.h"

#include <gtest/gtest.h>

#include <set>

#include "delib/record.h"
#include "test_util.h"

namespace delib {
namespace {

using testing::code_of;

TEST(Grammar, BuiltinShape) {
  const Grammar g = Grammar::builtin();
  EXPECT_NO_THROW(g.validate());
  EXPECT_EQ(g.domains.size(), 9u);
  EXPECT_EQ(g.intent_labels().size(), 18u);
  EXPECT_EQ(g.slot_labels().size(), 26u);
  EXPECT_EQ(g.ontology_tokens().size(), 18u + 26u + 1u);
  const auto words = g.words();
  EXPECT_TRUE(std::is_sorted(words.begin(), words.end()));
  EXPECT_EQ(std::set<std::string>(words.begin(), words.end()).size(), words.size());
}

TEST(GenerateCorpus, FlatWhenFractionIsZero) {
  for (const auto& r : generate_corpus(Grammar::builtin(), 300, 0.0, 3)) {
    EXPECT_FALSE(parse_annotation(r.target_annotation).is_compositional()) << r.target_annotation;
  }
}

TEST(GenerateCorpus, ValidAnnotationsAndCompositionalShare) {
  const auto records = generate_corpus(Grammar::builtin(), 1000, 0.3, 4);
  ASSERT_EQ(records.size(), 1000u);
  size_t nested = 0;
  std::set<std::string> ids;
  for (const auto& r : records) {
    const ParseNode t = parse_annotation(r.target_annotation);
    nested += t.is_compositional();
    ids.insert(r.id);
    EXPECT_FALSE(r.reference_text.empty());
    // Every slot word appears in the utterance.
    for (const std::string& tok : lex_annotation(r.target_annotation)) {
      if (tok.front() == '[' || tok == "]") continue;
      EXPECT_NE(std::find(r.reference_text.begin(), r.reference_text.end(), tok), r.reference_text.end());
    }
  }
  EXPECT_EQ(ids.size(), records.size());
  EXPECT_NEAR(nested / 1000.0, 0.3, 0.05);
  EXPECT_EQ(code_of([] { generate_corpus(Grammar::builtin(), 5, 1.5, 1); }),
            ErrorCode::kFractionOutOfRange);
}

TEST(GenerateCorpus, Deterministic) {
  const auto a = generate_corpus(Grammar::builtin(), 50, 0.2, 8);
  const auto b = generate_corpus(Grammar::builtin(), 50, 0.2, 8);
  const auto c = generate_corpus(Grammar::builtin(), 50, 0.2, 9);
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(to_json_line(a[i]), to_json_line(b[i]));
  size_t same = 0;
  for (size_t i = 0; i < a.size(); ++i) same += a[i].target_annotation == c[i].target_annotation;
  EXPECT_LT(same, a.size());
}

TEST(SynthAudio, FrameCounts) {
  AudioSynthConfig cfg;
  cfg.jitter = 0;
  const std::vector<std::string> words{"play", "some", "jazz"};
  const Tensor natural = synth_audio_features(words, FeatureChannel::kNatural, 1, cfg);
  EXPECT_EQ(natural.shape(), (std::array<size_t, 2>{18, 16}));
  const Tensor mismatched = synth_audio_features(words, FeatureChannel::kMismatched, 1, cfg);
  EXPECT_EQ(mismatched.shape(), (std::array<size_t, 2>{15, 16}));
  EXPECT_EQ(code_of([] { synth_audio_features({}, FeatureChannel::kNatural, 1); }),
            ErrorCode::kEmptyReference);
}

TEST(SynthAudio, ChannelsDifferButShareWordIdentity) {
  AudioSynthConfig cfg;
  cfg.jitter = 0;
  cfg.mismatched_frames_per_word = cfg.frames_per_word;
  const std::vector<std::string> words{"boston"};
  const Tensor a = synth_audio_features(words, FeatureChannel::kNatural, 1, cfg);
  const Tensor b = synth_audio_features(words, FeatureChannel::kNatural, 2, cfg);
  const Tensor m = synth_audio_features(words, FeatureChannel::kMismatched, 1, cfg);
  ASSERT_EQ(a.shape(), m.shape());
  double nat = 0.0, mis = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    nat += std::abs(a.values()[i] - b.values()[i]);
    mis += std::abs(a.values()[i] - m.values()[i]);
  }
  EXPECT_GT(nat, 0.0);
  EXPECT_GT(mis, 0.0);
  // Values are quantized to 1e-4.
  for (double v : a.values()) EXPECT_NEAR(v * 1e4, std::round(v * 1e4), 1e-6);
}

TEST(AttachHypotheses, ErrorFractionFollowsChannel) {
  const Grammar g = Grammar::builtin();
  auto records = generate_corpus(g, 2000, 0.2, 5);
  const auto model = AsrErrorModel::for_target_wer(0.2, build_confusion_pools(g, 5), insertion_fillers());
  attach_hypotheses(records, model, 6);
  double expected_clean = 0.0;
  for (const auto& r : records) {
    expected_clean += model.clean_probability(r.reference_text.size());
    EXPECT_EQ(r.has_asr_error, differs_after_normalization(r.hypothesis_text, r.reference_text));
    EXPECT_FALSE(r.hypothesis_text.empty());
  }
  const double error_fraction = static_cast<double>(count_errors(records)) / records.size();
  EXPECT_NEAR(error_fraction, 1.0 - expected_clean / records.size(), 0.1);
}

TEST(ConfusionPoolsBuilder, EveryWordHasAlternatives) {
  const Grammar g = Grammar::builtin();
  const ConfusionPools pools = build_confusion_pools(g, 1);
  for (const std::string& w : g.words()) {
    ASSERT_TRUE(pools.count(w)) << w;
    EXPECT_GE(pools.at(w).size(), 2u);
    for (const std::string& alt : pools.at(w)) EXPECT_NE(alt, w);
  }
}

TEST(Split, SizesAndDisjointness) {
  auto records = generate_corpus(Grammar::builtin(), 200, 0.2, 7);
  const DatasetSplits s = split(records, SplitRatios{}, 3);
  EXPECT_EQ(s.train.size(), 140u);
  EXPECT_EQ(s.valid.size(), 30u);
  EXPECT_EQ(s.test.size(), 30u);
  std::set<std::string> ids;
  for (const auto* part : {&s.train, &s.valid, &s.test}) {
    for (const auto& r : *part) ids.insert(r.id);
  }
  EXPECT_EQ(ids.size(), 200u);
  const DatasetSplits again = split(records, SplitRatios{}, 3);
  for (size_t i = 0; i < s.train.size(); ++i) EXPECT_EQ(s.train[i].id, again.train[i].id);
  EXPECT_EQ(code_of([&] { split(records, SplitRatios{0.5, 0.2, 0.2}, 1); }), ErrorCode::kBadRatios);
  EXPECT_EQ(code_of([&] { split(records, SplitRatios{1.2, -0.1, -0.1}, 1); }), ErrorCode::kBadRatios);
}

TEST(Jsonl, RoundTrip) {
  auto records = generate_corpus(Grammar::builtin(), 20, 0.2, 9);
  attach_audio(records, FeatureChannel::kNatural, 2);
  attach_hypotheses(records, AsrErrorModel::for_target_wer(0.3, {}, insertion_fillers()), 4);
  const std::string path = testing::fresh_dir("jsonl") + "/r.jsonl";
  write_jsonl(path, records);
  const auto back = read_jsonl(path);
  ASSERT_EQ(back.size(), records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(to_json_line(back[i]), to_json_line(records[i]));
    EXPECT_EQ(back[i].audio.shape(), records[i].audio.shape());
  }
  EXPECT_EQ(code_of([] { from_json_line("{not json"); }), ErrorCode::kFormat);
}

}  // namespace
}  // namespace delib
