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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <thread>

#include "delib/error.h"
#include "delib/experiment.h"
#include "delib/parse.h"

namespace delib {
namespace {

double rate(size_t hits, size_t n) {
  return n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string hex(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Left-aligned columns separated by two spaces.
std::string align(const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> width;
  for (const auto& row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (size_t i = 0; i < row.size(); ++i) {
      line += row[i];
      if (i + 1 < row.size()) line += std::string(width[i] - row[i].size() + 2, ' ');
    }
    out += line + "\n";
  }
  return out;
}

}  // namespace

EvalReport score_predictions(const std::vector<std::string>& predictions,
                             const std::vector<UtteranceRecord>& records) {
  if (predictions.size() != records.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(predictions.size()) +
                                                " predictions for " +
                                                std::to_string(records.size()) + " records");
  }
  EvalReport r;
  r.n = records.size();
  for (size_t i = 0; i < records.size(); ++i) {
    const bool hit = exact_match(predictions[i], records[i].target_annotation);
    if (records[i].has_asr_error) {
      ++r.n_error;
      r.hits_error += hit ? 1 : 0;
    } else {
      ++r.n_no_error;
      r.hits_no_error += hit ? 1 : 0;
    }
  }
  r.em_overall = rate(r.hits(), r.n);
  r.em_no_error = rate(r.hits_no_error, r.n_no_error);
  r.em_error = rate(r.hits_error, r.n_error);
  r.predictions = predictions;
  return r;
}

EvalReport evaluate(const DeliberationModel& model, uint64_t checkpoint_vocab_digest,
                    const Featurizer& featurizer, const std::vector<UtteranceRecord>& records) {
  if (checkpoint_vocab_digest != featurizer.vocab().digest()) {
    throw Error(ErrorCode::kVocabMismatch,
                "checkpoint vocabulary " + hex(checkpoint_vocab_digest) + " vs dataset vocabulary " +
                    hex(featurizer.vocab().digest()));
  }
  std::vector<std::string> predictions;
  predictions.reserve(records.size());
  for (const UtteranceRecord& r : records) {
    predictions.push_back(predict_annotation(model, featurizer, r));
  }
  return score_predictions(predictions, records);
}

std::string summary_json(const EvalReport& r) {
  return "{\"n\":" + std::to_string(r.n) + ",\"n_no_error\":" + std::to_string(r.n_no_error) +
         ",\"n_error\":" + std::to_string(r.n_error) +
         ",\"hits_no_error\":" + std::to_string(r.hits_no_error) +
         ",\"hits_error\":" + std::to_string(r.hits_error) +
         ",\"em_overall\":" + fmt("%.6f", r.em_overall) +
         ",\"em_no_error\":" + fmt("%.6f", r.em_no_error) +
         ",\"em_error\":" + fmt("%.6f", r.em_error) + "}";
}

RunConfig cell_config(const RunConfig& base, const CellSpec& cell, uint64_t seed) {
  RunConfig c = base;
  c.seed = seed;
  c.asr.tier = cell.tier;
  c.asr.target_wer = cell.tier == AsrTier::kTier1 ? base.matrix.tier1_wer : base.matrix.tier2_wer;
  c.model.modality = cell.modality;
  c.train.strategy = cell.strategy;
  c.data.train_channel = cell.channel;
  c.jobs = 1;
  return c;
}

MatrixRow run_cell(const RunConfig& config, const std::string& dir) {
  namespace fs = std::filesystem;
  const auto start = std::chrono::steady_clock::now();
  ensure_dir(dir);
  MatrixRow row;
  row.seed = config.seed;
  const std::string config_text = config.to_ini();
  const std::string ckpt = dir + "/best.ckpt";
  const std::string vocab_path = dir + "/vocab.txt";
  const std::string config_path = dir + "/config.ini";
  // config.ini is written last, so its presence marks a finished run.
  row.cached = fs::exists(ckpt) && fs::exists(vocab_path) && fs::exists(config_path) &&
               read_file(config_path) == config_text;

  const DatasetSplits data = generate_dataset(config);
  const Vocabulary vocab = row.cached ? Vocabulary::load(vocab_path)
                                      : build_vocabulary(data.train, config.text_pieces);
  const AsrStub stub = make_stub(config, vocab);
  const Featurizer featurizer(stub, vocab);
  if (!row.cached) {
    auto model = make_model(config, vocab);
    vocab.save(vocab_path);
    train(*model, featurizer, data.train, data.valid, train_config(config), dir);
    write_file(config_path, config_text);
  }
  uint64_t digest = 0;
  auto model = load_model(config, vocab, ckpt, &digest);
  row.report = evaluate(*model, digest, featurizer, data.test);
  write_file(dir + "/eval.json", summary_json(row.report) + "\n");
  row.report.predictions.clear();
  row.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

MatrixReport run_matrix(const RunConfig& base, const std::string& out_dir, size_t jobs,
                        const CellRunner& runner) {
  const auto start = std::chrono::steady_clock::now();
  MatrixReport report;
  report.seeds = base.matrix.seeds;
  struct Job {
    CellSpec cell;
    RunConfig config;
  };
  std::vector<Job> work;
  for (const CellSpec& cell : base.matrix.cells) {
    for (uint64_t seed : base.matrix.seeds) work.push_back({cell, cell_config(base, cell, seed)});
  }
  report.rows.resize(work.size());

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < work.size(); i = next++) {
      const Job& job = work[i];
      MatrixRow row;
      try {
        row = runner(job.config, out_dir + "/cells/" + hex(job.config.digest()));
      } catch (const std::exception& e) {
        row = MatrixRow{};
        row.error = e.what();
      }
      row.cell = job.cell;
      row.seed = job.config.seed;
      report.rows[i] = std::move(row);
    }
  };
  const size_t threads = std::max<size_t>(1, std::min(jobs, work.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  report.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

CellMean cell_mean(const MatrixReport& report, const CellSpec& cell) {
  CellMean m;
  for (const MatrixRow& row : report.rows) {
    if (!(row.cell == cell) || !row.error.empty()) continue;
    m.em_overall += row.report.em_overall;
    m.em_no_error += row.report.em_no_error;
    m.em_error += row.report.em_error;
    ++m.seeds;
  }
  if (m.seeds > 0) {
    const double k = static_cast<double>(m.seeds);
    m.em_overall /= k;
    m.em_no_error /= k;
    m.em_error /= k;
  }
  return m;
}

namespace {

std::vector<CellSpec> distinct_cells(const MatrixReport& report) {
  std::vector<CellSpec> cells;
  for (const MatrixRow& row : report.rows) {
    if (std::find(cells.begin(), cells.end(), row.cell) == cells.end()) cells.push_back(row.cell);
  }
  return cells;
}

std::vector<std::string> cell_columns(const CellSpec& c) {
  return {std::string(to_string(c.tier)), std::string(to_string(c.modality)),
          std::string(to_string(c.strategy)), std::string(to_string(c.channel))};
}

}  // namespace

std::string format_csv(const MatrixReport& report) {
  std::string out =
      "tier,modality,strategy,channel,seed,em_overall,em_no_error,em_error,n_no_error,n_error\n";
  auto line = [](const CellSpec& c, const std::string& seed, double all, double clean,
                 double err, const std::string& n0, const std::string& n1) {
    std::string s;
    for (const std::string& col : cell_columns(c)) s += col + ",";
    return s + seed + "," + fmt("%.4f", all) + "," + fmt("%.4f", clean) + "," + fmt("%.4f", err) +
           "," + n0 + "," + n1 + "\n";
  };
  for (const MatrixRow& row : report.rows) {
    if (!row.error.empty()) continue;
    out += line(row.cell, std::to_string(row.seed), row.report.em_overall, row.report.em_no_error,
                row.report.em_error, std::to_string(row.report.n_no_error),
                std::to_string(row.report.n_error));
  }
  for (const CellSpec& cell : distinct_cells(report)) {
    const CellMean m = cell_mean(report, cell);
    if (m.seeds == 0) continue;
    out += line(cell, "mean", m.em_overall, m.em_no_error, m.em_error, "", "");
  }
  return out;
}

std::string format_table(const MatrixReport& report) {
  std::string seeds;
  for (uint64_t s : report.seeds) seeds += (seeds.empty() ? "" : ", ") + std::to_string(s);
  std::string out = "Exact match on test, mean over seeds " + seeds + "\n\n";

  std::vector<std::vector<std::string>> rows{
      {"tier", "modality", "strategy", "channel", "overall", "no_error", "error", "seeds"}};
  const std::vector<CellSpec> cells = distinct_cells(report);
  for (const CellSpec& cell : cells) {
    const CellMean m = cell_mean(report, cell);
    std::vector<std::string> r = cell_columns(cell);
    if (m.seeds == 0) {
      r.insert(r.end(), {"failed", "", "", "0"});
    } else {
      r.insert(r.end(), {fmt("%.4f", m.em_overall), fmt("%.4f", m.em_no_error),
                         fmt("%.4f", m.em_error), std::to_string(m.seeds)});
    }
    rows.push_back(r);
  }
  out += align(rows);

  // Mismatched-channel cells against their natural counterparts.
  std::vector<std::vector<std::string>> mismatch{
      {"tier", "modality", "strategy", "natural", "mismatched", "delta"}};
  for (const CellSpec& cell : cells) {
    if (cell.channel != FeatureChannel::kMismatched) continue;
    CellSpec natural = cell;
    natural.channel = FeatureChannel::kNatural;
    const CellMean a = cell_mean(report, natural);
    const CellMean b = cell_mean(report, cell);
    if (a.seeds == 0 || b.seeds == 0) continue;
    mismatch.push_back({std::string(to_string(cell.tier)), std::string(to_string(cell.modality)),
                        std::string(to_string(cell.strategy)), fmt("%.4f", a.em_overall),
                        fmt("%.4f", b.em_overall), fmt("%+.4f", b.em_overall - a.em_overall)});
  }
  if (mismatch.size() > 1) {
    out += "\nTrained on mismatched features, evaluated on natural\n\n" + align(mismatch);
  }

  std::vector<std::vector<std::string>> per_seed{
      {"tier", "modality", "strategy", "channel", "seed", "overall", "no_error", "error",
       "n_no_error", "n_error", "seconds", "note"}};
  for (const MatrixRow& row : report.rows) {
    std::vector<std::string> r = cell_columns(row.cell);
    r.push_back(std::to_string(row.seed));
    if (!row.error.empty()) {
      r.insert(r.end(), {"", "", "", "", "", "", "error: " + row.error});
    } else {
      r.insert(r.end(), {fmt("%.4f", row.report.em_overall), fmt("%.4f", row.report.em_no_error),
                         fmt("%.4f", row.report.em_error), std::to_string(row.report.n_no_error),
                         std::to_string(row.report.n_error), fmt("%.1f", row.seconds),
                         row.cached ? "cached" : ""});
    }
    per_seed.push_back(r);
  }
  out += "\nPer seed\n\n" + align(per_seed);
  out += "\nTotal wall seconds: " + fmt("%.1f", report.total_seconds) + "\n";

  out +=
      "\nReference directions (published full-scale results, EM %)\n\n"
      "  strong ASR: fusion+union 73.87 > text+union 73.22\n"
      "  error bucket: audio 38.10 > text 30.32, pipeline text 24.49; fusion 31.42\n"
      "  no-error bucket: text 83.12 > audio 77.32; fusion 83.68\n"
      "  synthetic training speech: fusion -1.91 / -1.56, audio -2.89 / -5.32"
      " (strong / weak ASR)\n";
  return out;
}

}  // namespace delib
