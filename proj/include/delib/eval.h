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

// Exact-match evaluation, split by whether the first pass made an error,
// and the experiment matrix built on top of it.

#ifndef DELIB_EVAL_H_
#define DELIB_EVAL_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "delib/config.h"
#include "delib/model.h"
#include "delib/pipeline.h"
#include "delib/record.h"

namespace delib {

struct EvalReport {
  size_t n = 0;
  size_t n_no_error = 0;
  size_t n_error = 0;
  size_t hits_no_error = 0;
  size_t hits_error = 0;
  double em_overall = 0.0;
  double em_no_error = 0.0;  // 0 for an empty bucket
  double em_error = 0.0;
  std::vector<std::string> predictions;  // one per record, in order

  size_t hits() const { return hits_no_error + hits_error; }
};

// Scores `predictions` against the records' targets. Throws kLengthMismatch.
EvalReport score_predictions(const std::vector<std::string>& predictions,
                             const std::vector<UtteranceRecord>& records);

// Greedy-decodes every record. Throws kVocabMismatch when the checkpoint was
// trained with a different vocabulary than the featurizer's.
EvalReport evaluate(const DeliberationModel& model, uint64_t checkpoint_vocab_digest,
                    const Featurizer& featurizer, const std::vector<UtteranceRecord>& records);

// {"n":..,"n_no_error":..,..} without predictions.
std::string summary_json(const EvalReport& report);

struct MatrixRow {
  CellSpec cell;
  uint64_t seed = 0;
  EvalReport report;  // predictions dropped
  double seconds = 0.0;
  bool cached = false;
  std::string error;  // non-empty when the cell failed
};

struct MatrixReport {
  std::vector<MatrixRow> rows;  // cells in config order, seeds inner
  std::vector<uint64_t> seeds;
  double total_seconds = 0.0;
};

// Trains (or loads) and evaluates one cell into `dir`. The default runner
// reuses dir/best.ckpt when dir/config.ini matches the cell config.
using CellRunner = std::function<MatrixRow(const RunConfig& cell_config, const std::string& dir)>;

MatrixRow run_cell(const RunConfig& cell_config, const std::string& dir);

// The RunConfig a cell trains with: the base config with the cell's tier,
// WER, modality, strategy, training channel and seed.
RunConfig cell_config(const RunConfig& base, const CellSpec& cell, uint64_t seed);

// Runs every cell x seed with up to `jobs` threads. A failing cell is
// recorded in its row and the rest of the matrix still runs. Cell
// directories are out_dir/cells/<digest>.
MatrixReport run_matrix(const RunConfig& base, const std::string& out_dir, size_t jobs,
                        const CellRunner& runner = run_cell);

// Per-seed rows followed by one mean row per cell (seed column "mean").
std::string format_csv(const MatrixReport& report);
// Aligned tables: modality x strategy, error buckets, channel mismatch,
// then the published reference directions.
std::string format_table(const MatrixReport& report);

struct CellMean {
  double em_overall = 0.0;
  double em_no_error = 0.0;
  double em_error = 0.0;
  size_t seeds = 0;  // successful seeds averaged
};
// Seed mean for one cell; seeds == 0 when the cell never succeeded.
CellMean cell_mean(const MatrixReport& report, const CellSpec& cell);

}  // namespace delib

#endif  // DELIB_EVAL_H_
