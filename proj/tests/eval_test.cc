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

#include "delib/eval.h"

#include <gtest/gtest.h>

#include <mutex>
#include <set>

#include "delib/experiment.h"
#include "test_util.h"

namespace delib {
namespace {

using testing::code_of;
using testing::fresh_dir;

std::vector<UtteranceRecord> labeled(const std::vector<std::pair<std::string, bool>>& items) {
  std::vector<UtteranceRecord> out;
  for (const auto& [target, error] : items) {
    UtteranceRecord r;
    r.target_annotation = target;
    r.has_asr_error = error;
    out.push_back(r);
  }
  return out;
}

TEST(ScorePredictions, EchoAndEmpty) {
  const auto records = labeled({{"[IN:A ]", false}, {"[IN:B [SL:X y ] ]", true}, {"[IN:C ]", true}});
  std::vector<std::string> echo;
  for (const auto& r : records) echo.push_back(r.target_annotation);
  const EvalReport all = score_predictions(echo, records);
  EXPECT_DOUBLE_EQ(all.em_overall, 1.0);
  EXPECT_EQ(all.n_no_error, 1u);
  EXPECT_EQ(all.n_error, 2u);
  const EvalReport none = score_predictions({"", "", ""}, records);
  EXPECT_DOUBLE_EQ(none.em_overall, 0.0);
  EXPECT_EQ(none.hits(), 0u);
  EXPECT_EQ(code_of([&] { score_predictions({""}, records); }), ErrorCode::kLengthMismatch);
}

TEST(ScorePredictions, BucketsWeightTheOverallScore) {
  const auto records = labeled({{"[IN:A ]", false},
                                {"[IN:A ]", false},
                                {"[IN:A ]", false},
                                {"[IN:B ]", true},
                                {"[IN:B ]", true}});
  const EvalReport r = score_predictions({"[IN:A ]", "[IN:A ]", "[IN:X ]", "[IN:B ]", "[IN:X ]"}, records);
  EXPECT_DOUBLE_EQ(r.em_no_error, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.em_error, 0.5);
  EXPECT_DOUBLE_EQ(r.em_overall, 3.0 / 5.0);
  EXPECT_NEAR(r.em_overall, (r.n_no_error * r.em_no_error + r.n_error * r.em_error) / r.n, 1e-15);
  const EvalReport clean = score_predictions({"[IN:A ]"}, labeled({{"[IN:A ]", false}}));
  EXPECT_DOUBLE_EQ(clean.em_error, 0.0);
  EXPECT_EQ(summary_json(r),
            "{\"n\":5,\"n_no_error\":3,\"n_error\":2,\"hits_no_error\":2,\"hits_error\":1,"
            "\"em_overall\":0.600000,\"em_no_error\":0.666667,\"em_error\":0.500000}");
}

RunConfig tiny_config() {
  RunConfig c = RunConfig::defaults("toy");
  c.data.n = 40;
  c.text_pieces = 60;
  c.train.epochs = 2;
  c.train.batch_size = 8;
  return c;
}

TEST(Evaluate, RejectsForeignCheckpoint) {
  const RunConfig cfg = tiny_config();
  const DatasetSplits data = generate_dataset(cfg);
  const Vocabulary vocab = build_vocabulary(data.train, cfg.text_pieces);
  const AsrStub stub = make_stub(cfg, vocab);
  const Featurizer featurizer(stub, vocab);
  auto model = make_model(cfg, vocab);
  EXPECT_EQ(code_of([&] { evaluate(*model, vocab.digest() + 1, featurizer, data.test); }),
            ErrorCode::kVocabMismatch);
  const EvalReport r = evaluate(*model, vocab.digest(), featurizer, data.test);
  EXPECT_EQ(r.n, data.test.size());
  EXPECT_EQ(r.predictions.size(), data.test.size());
}

RunConfig six_cell_config() {
  RunConfig c = tiny_config();
  c.matrix.cells.clear();
  for (const char* key : {"tier1:fusion:hyp:natural", "tier1:fusion:ref:natural",
                          "tier1:fusion:union:natural", "tier1:text:union:natural",
                          "tier1:audio:ref:natural", "tier2:audio:ref:mismatched"}) {
    c.matrix.cells.push_back(CellSpec::parse(key));
  }
  c.matrix.seeds = {1, 2, 3};
  return c;
}

// Scores derived from the config so results can be checked by position.
MatrixRow fake_row(const RunConfig& cfg) {
  MatrixRow row;
  row.report.n = 10;
  row.report.n_no_error = 6;
  row.report.n_error = 4;
  row.report.em_overall = 0.1 * static_cast<double>(cfg.seed);
  row.report.em_no_error = cfg.asr.target_wer;
  row.report.em_error = cfg.model.modality == Modality::kAudioOnly ? 0.5 : 0.25;
  return row;
}

TEST(Matrix, EighteenRunsInConfigOrder) {
  const RunConfig base = six_cell_config();
  std::mutex mu;
  std::set<std::string> dirs;
  const MatrixReport report = run_matrix(base, fresh_dir("matrix_fake"), 3,
                                         [&](const RunConfig& cfg, const std::string& dir) {
                                           std::lock_guard<std::mutex> lock(mu);
                                           dirs.insert(dir);
                                           return fake_row(cfg);
                                         });
  ASSERT_EQ(report.rows.size(), 18u);
  EXPECT_EQ(dirs.size(), 18u);
  for (size_t i = 0; i < 18; ++i) {
    const MatrixRow& row = report.rows[i];
    EXPECT_EQ(row.cell, base.matrix.cells[i / 3]);
    EXPECT_EQ(row.seed, base.matrix.seeds[i % 3]);
    EXPECT_DOUBLE_EQ(row.report.em_overall, 0.1 * row.seed);
    EXPECT_TRUE(row.error.empty());
  }
  EXPECT_DOUBLE_EQ(report.rows[15].report.em_no_error, base.matrix.tier2_wer);
  const CellMean m = cell_mean(report, base.matrix.cells[0]);
  EXPECT_EQ(m.seeds, 3u);
  EXPECT_NEAR(m.em_overall, 0.2, 1e-12);

  const std::string csv = format_csv(report);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "tier,modality,strategy,channel,seed,em_overall,em_no_error,em_error,n_no_error,n_error");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 18 + 6);
  EXPECT_NE(format_table(report).find("Reference directions"), std::string::npos);
}

TEST(Matrix, FailingCellDoesNotStopTheRest) {
  const RunConfig base = six_cell_config();
  const MatrixReport report =
      run_matrix(base, fresh_dir("matrix_fail"), 2, [](const RunConfig& cfg, const std::string&) {
        if (cfg.model.modality == Modality::kTextOnly && cfg.seed == 2) {
          throw Error(ErrorCode::kNonFiniteLoss, "diverged");
        }
        return fake_row(cfg);
      });
  size_t failed = 0;
  for (const MatrixRow& row : report.rows) {
    if (!row.error.empty()) {
      ++failed;
      EXPECT_NE(row.error.find("diverged"), std::string::npos);
      EXPECT_EQ(row.cell.modality, Modality::kTextOnly);
    }
  }
  EXPECT_EQ(failed, 1u);
  EXPECT_EQ(cell_mean(report, base.matrix.cells[3]).seeds, 2u);
  const std::string csv = format_csv(report);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 17 + 6);
}

TEST(Matrix, SecondRunIsServedFromCache) {
  RunConfig base = tiny_config();
  base.matrix.cells = {CellSpec::parse("tier1:fusion:union:natural")};
  base.matrix.seeds = {1};
  const std::string out = fresh_dir("matrix_cache");
  const MatrixReport first = run_matrix(base, out, 1);
  const MatrixReport second = run_matrix(base, out, 1);
  ASSERT_TRUE(first.rows.at(0).error.empty()) << first.rows[0].error;
  EXPECT_FALSE(first.rows[0].cached);
  EXPECT_TRUE(second.rows.at(0).cached);
  EXPECT_EQ(format_csv(first), format_csv(second));
}

}  // namespace
}  // namespace delib
