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

// Acceptance suite. Runs every criterion (or the numbers given on the
// command line) and prints one PASS/FAIL line per criterion. Exit status is
// nonzero when any criterion fails.
//
//   delib_acceptance            all twelve
//   delib_acceptance 1 5 9      a subset

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "delib/error.h"
#include "delib/eval.h"
#include "delib/experiment.h"
#include "delib/parse.h"
#include "delib/pipeline.h"
#include "fixtures.h"
#include "golden.h"
#include "oracle.h"

namespace delib {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

std::string work_root() {
  static const std::string root = [] {
    const fs::path p = fs::temp_directory_path() / ("delib_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
  }();
  return root;
}

// --- 1 ---------------------------------------------------------------------

Outcome gradient_fidelity() {
  const GradcheckResult r = gradcheck_model("toy", Modality::kFusion, 1);
  return {r.max_rel_error < 1e-3 && r.seconds < 60.0,
          fmt("max rel error %.2e over %.0f parameters in %.1f s", r.max_rel_error,
              static_cast<double>(r.parameters), r.seconds)};
}

// --- 2, 3 ------------------------------------------------------------------

Outcome mixture_algebra() {
  size_t bad_sum = 0, bad_support = 0, bad_endpoint = 0;
  double worst = 0.0;
  Rng rng(2);
  for (int model_seed = 0; model_seed < 10; ++model_seed) {
    const ModelConfig c = fixtures::small_config(Modality::kFusion, 20);
    const DeliberationModel model(c, model_seed);
    for (int i = 0; i < 100; ++i) {
      const ModelInputs in = fixtures::random_inputs(c, 1 + rng.below(6), 1 + rng.below(6), rng);
      const Tensor e = model.encode(in);
      const Tensor state = normal_init(1, c.dim, 2.0, rng);
      const DecoderStepOutput s = model.decode_step(state, e, in.hypothesis);
      double total = 0.0;
      for (double v : s.o) total += v;
      worst = std::max(worst, std::abs(total - 1.0));
      bad_sum += std::abs(total - 1.0) >= 1e-6;
      const std::set<int> hyp(in.hypothesis.begin(), in.hypothesis.end());
      for (size_t k = 0; k < s.c.size(); ++k) bad_support += s.c[k] != 0.0 && !hyp.count(static_cast<int>(k));
      bad_endpoint += model.decode_step(state, e, in.hypothesis, 0.0).o != s.g;
      bad_endpoint += model.decode_step(state, e, in.hypothesis, 1.0).o != s.c;
    }
  }
  return {bad_sum + bad_support + bad_endpoint == 0,
          fmt("1000 steps: max |sum(o)-1| %.1e, %.0f support violations, %.0f endpoint mismatches",
              worst, static_cast<double>(bad_support), static_cast<double>(bad_endpoint))};
}

Outcome scatter_oracle() {
  size_t mismatches = 0, with_duplicates = 0;
  Rng rng(3);
  const ModelConfig c = fixtures::small_config(Modality::kFusion, 16);
  for (int i = 0; i < 100; ++i) {
    const DeliberationModel model(c, 100 + i);
    ModelInputs in = fixtures::random_inputs(c, 2 + rng.below(5), 1 + rng.below(4), rng);
    if (i % 2 == 0) in.hypothesis.back() = in.hypothesis.front();
    with_duplicates += std::set<int>(in.hypothesis.begin(), in.hypothesis.end()).size() < in.hypothesis.size();
    const Tensor e = model.encode(in);
    const DecoderStepOutput s = model.decode_step(normal_init(1, c.dim, 1.0, rng), e, in.hypothesis);
    // Brute force: for every vocabulary entry, add up the attention of each
    // hypothesis position holding it.
    for (size_t k = 0; k < c.vocab_size; ++k) {
      double expected = 0.0;
      for (size_t j = 0; j < in.hypothesis.size(); ++j) {
        if (in.hypothesis[j] == static_cast<int>(k)) expected += s.omega[j];
      }
      mismatches += s.c[k] != expected;
    }
  }
  return {mismatches == 0 && with_duplicates > 0,
          fmt("100 cases (%.0f with repeated tokens), %.0f entries differ", static_cast<double>(with_duplicates),
              static_cast<double>(mismatches))};
}

// --- 4 ---------------------------------------------------------------------

Outcome fusion_oracle() {
  double fuse_err = 0.0, pool_err = 0.0, step_err = 0.0;
  Rng rng(4);
  for (int i = 0; i < 25; ++i) {
    const ModelConfig c = fixtures::small_config(Modality::kFusion, 12);
    const DeliberationModel model(c, 200 + i);
    const ModelInputs in = fixtures::random_inputs(c, 1 + rng.below(5), 1 + rng.below(5), rng);
    const oracle::Mat text = oracle::to_mat(in.text), audio = oracle::to_mat(in.audio);
    const oracle::Mat fused = oracle::fuse(model, text, audio);
    fuse_err = std::max(fuse_err, oracle::max_abs_diff(oracle::to_mat(model.fuse(in.text, in.audio)), fused));
    const oracle::Mat pooled = oracle::pool(model, fused);
    const Tensor e = model.encode(in);
    pool_err = std::max(pool_err, oracle::max_abs_diff(oracle::to_mat(e), pooled));
    const Tensor state = normal_init(1, c.dim, 1.0, rng);
    const DecoderStepOutput s = model.decode_step(state, e, in.hypothesis);
    const oracle::Step o = oracle::decode_step(model, oracle::to_mat(state), pooled, in.hypothesis);
    step_err = std::max(step_err, std::abs(s.p_copy - o.p_copy));
    for (size_t k = 0; k < c.vocab_size; ++k) {
      step_err = std::max({step_err, std::abs(s.g[k] - o.g[k]), std::abs(s.c[k] - o.c[k]),
                           std::abs(s.o[k] - o.o[k])});
    }
  }
  return {fuse_err < 1e-10 && pool_err < 1e-10 && step_err < 1e-10,
          fmt("max abs error fuse %.1e, pool %.1e, decode_step %.1e", fuse_err, pool_err, step_err)};
}

// --- 5, 6, 8 ---------------------------------------------------------------

Outcome golden_suite() {
  size_t wrong = 0;
  std::string first;
  for (const auto& c : golden::kEmCases) {
    if (exact_match(c.hyp, c.ref) != c.match) {
      ++wrong;
      if (first.empty()) first = std::string(c.why);
    }
  }
  return {wrong == 0, fmt("%.0f/20 labeled pairs scored as labeled", 20.0 - wrong) +
                          (first.empty() ? "" : ", first miss: " + first)};
}

Outcome parse_round_trip() {
  const auto records = generate_corpus(Grammar::builtin(), 1000, 0.3, 6);
  size_t round_trips = 0;
  for (const auto& r : records) {
    try {
      round_trips += serialize(parse_annotation(r.target_annotation)) == r.target_annotation;
    } catch (const delib::Error&) {
    }
  }
  Rng rng(66);
  size_t mutants = 0, rejected = 0;
  while (mutants < 1000) {
    const auto& r = records[rng.below(records.size())];
    const std::vector<std::string> tokens = lex_annotation(r.target_annotation);
    std::vector<size_t> brackets;
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i].front() == '[' || tokens[i] == "]") brackets.push_back(i);
    }
    const size_t drop = brackets[rng.below(brackets.size())];
    std::string mutant;
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (i != drop) mutant += tokens[i] + " ";
    }
    ++mutants;
    try {
      parse_annotation(mutant);
    } catch (const delib::Error&) {
      ++rejected;
    }
  }
  return {round_trips == 1000 && rejected == mutants,
          fmt("%.0f/1000 round trips, %.0f/%.0f bracket-deletion mutants rejected",
              static_cast<double>(round_trips), static_cast<double>(rejected), static_cast<double>(mutants))};
}

Outcome union_counting() {
  RunConfig cfg = RunConfig::defaults();
  cfg.data.n = 2000;
  const DatasetSplits data = generate_dataset(cfg);
  const size_t n = data.train.size(), e = count_errors(data.train);
  const size_t pairs = build_pairs(data.train, TextStrategy::kUnion).size();
  return {pairs == n + e && e > 0,
          fmt("N=%.0f, E=%.0f, union pairs %.0f", static_cast<double>(n), static_cast<double>(e),
              static_cast<double>(pairs))};
}

// --- 7, 9 ------------------------------------------------------------------

struct DeskRun {
  bool stub_unchanged = false;
  bool optimizer_clean = false;
  size_t params = 0;
  size_t epochs = 0;
  EvalReport report;
  double cpu = 0.0;
};

DeskRun desk_run(RunConfig cfg) {
  const double start = cpu_seconds();
  const DatasetSplits data = generate_dataset(cfg);
  const Vocabulary vocab = build_vocabulary(data.train, cfg.text_pieces);
  const AsrStub stub = make_stub(cfg, vocab);
  const std::string before = stub.frozen_bytes();
  const Featurizer featurizer(stub, vocab);
  auto model = make_model(cfg, vocab);
  DeskRun run;
  run.params = model->param_count();
  const TrainResult result = train(*model, featurizer, data.train, data.valid, train_config(cfg));
  run.epochs = result.epochs.size();
  run.stub_unchanged = stub.frozen_bytes() == before;
  run.optimizer_clean = true;
  for (const Tensor& t : stub.frozen_tensors()) {
    if (std::find(result.optimized.begin(), result.optimized.end(), t.node()) != result.optimized.end()) {
      run.optimizer_clean = false;
    }
  }
  run.report = evaluate(*model, vocab.digest(), featurizer, data.test);
  run.cpu = cpu_seconds() - start;
  return run;
}

// Filled by criterion 9 and reused by criterion 7.
std::vector<DeskRun> desk_runs;

Outcome desk_learnability() {
  RunConfig cfg = RunConfig::defaults("desk");
  cfg.model.modality = Modality::kTextOnly;
  cfg.asr.target_wer = 0.0;
  cfg.seed = 9;
  const DeskRun run = desk_run(cfg);
  desk_runs.push_back(run);
  return {run.params < 200000 && run.report.em_overall >= 0.90 && run.cpu < 600.0,
          fmt("TextOnly, %.0f params: test EM %.4f after %.0f epochs, %.0f CPU s",
              static_cast<double>(run.params), run.report.em_overall, static_cast<double>(run.epochs),
              run.cpu)};
}

Outcome frozen_contract() {
  RunConfig cfg = RunConfig::defaults("desk");
  cfg.model.modality = Modality::kFusion;
  cfg.seed = 7;
  cfg.train.epochs = 5;
  desk_runs.push_back(desk_run(cfg));
  bool ok = true;
  for (const DeskRun& r : desk_runs) ok = ok && r.stub_unchanged && r.optimizer_clean;
  return {ok, fmt("%.0f desk runs: stub bytes unchanged and no optimizer state for stub tensors",
                  static_cast<double>(desk_runs.size()))};
}

// --- 10, 11 ----------------------------------------------------------------

std::optional<MatrixReport> matrix;

const MatrixReport& run_default_matrix() {
  if (!matrix) {
    const RunConfig base = RunConfig::defaults("desk");
    matrix = run_matrix(base, work_root() + "/matrix", 1);
    write_file(work_root() + "/matrix/report.txt", format_table(*matrix));
    std::fputs(format_table(*matrix).c_str(), stdout);
  }
  return *matrix;
}

CellMean mean(const char* key) { return cell_mean(*matrix, CellSpec::parse(key)); }

bool complete(std::initializer_list<CellMean> means) {
  return std::all_of(means.begin(), means.end(), [&](const CellMean& m) { return m.seeds == matrix->seeds.size(); });
}

Outcome directional_strategy_and_modality() {
  run_default_matrix();
  const CellMean hyp = mean("tier1:fusion:hyp:natural");
  const CellMean ref = mean("tier1:fusion:ref:natural");
  const CellMean uni = mean("tier1:fusion:union:natural");
  const CellMean text = mean("tier1:text:union:natural");
  const CellMean audio = mean("tier1:audio:ref:natural");
  const bool a = uni.em_overall >= ref.em_overall && uni.em_overall >= hyp.em_overall;
  const bool b = uni.em_error > text.em_error && audio.em_error > text.em_error &&
                 text.em_no_error > audio.em_no_error;
  const bool fast = matrix->total_seconds < 7200.0;
  std::string d = fmt("union %.4f, ref %.4f, hyp %.4f", uni.em_overall, ref.em_overall, hyp.em_overall);
  d += fmt("; error bucket fusion %.4f, text %.4f, audio %.4f", uni.em_error, text.em_error, audio.em_error);
  d += fmt("; no-error text %.4f, audio %.4f; matrix %.0f s", text.em_no_error, audio.em_no_error,
           matrix->total_seconds);
  return {complete({hyp, ref, uni, text, audio}) && a && b && fast, d};
}

Outcome directional_mismatch() {
  run_default_matrix();
  const CellMean audio_nat = mean("tier1:audio:ref:natural");
  const CellMean audio_mis = mean("tier1:audio:ref:mismatched");
  const CellMean fusion_nat = mean("tier1:fusion:union:natural");
  const CellMean fusion_mis = mean("tier1:fusion:union:mismatched");
  const double audio_drop = audio_nat.em_overall - audio_mis.em_overall;
  const double fusion_drop = fusion_nat.em_overall - fusion_mis.em_overall;
  return {complete({audio_nat, audio_mis, fusion_nat, fusion_mis}) && audio_drop > fusion_drop,
          fmt("mismatched-channel training: audio %+.4f, fusion %+.4f", -audio_drop, -fusion_drop)};
}

// --- 12 --------------------------------------------------------------------

int cli(const std::string& args) {
  const std::string cmd = std::string(DELIB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli_determinism() {
  const std::string root = work_root() + "/determinism";
  const std::string a = root + "/a", b = root + "/b";
  int failures = 0;
  failures += cli("datagen --preset toy --n 120 --seed 12 --out " + a + "/data") != 0;
  failures += cli("train --config " + a + "/data/config.ini --epochs 3 --out " + a + "/model") != 0;
  failures += cli("eval --config " + a + "/model/config.ini --out " + a + "/eval") != 0;
  // Rerun every stage from the configs the first pass saved.
  failures += cli("datagen --config " + a + "/data/config.ini --out " + b + "/data") != 0;
  failures += cli("train --config " + a + "/model/config.ini --out " + b + "/model") != 0;
  failures += cli("eval --config " + a + "/eval/config.ini --out " + b + "/eval") != 0;
  std::vector<std::string> differ;
  const char* artifacts[] = {"data/train.jsonl", "data/valid.jsonl", "data/test.jsonl",
                             "model/vocab.txt",  "model/best.ckpt",  "model/metrics.log",
                             "eval/predictions.anno", "eval/report.json"};
  for (const char* f : artifacts) {
    if (!fs::exists(a + "/" + f) || !fs::exists(b + "/" + f) || read_file(a + "/" + f) != read_file(b + "/" + f)) {
      differ.push_back(f);
    }
  }
  std::string d = fmt("%.0f artifacts compared, %.0f commands failed", std::size(artifacts), failures);
  for (const std::string& f : differ) d += ", differs: " + f;
  return {failures == 0 && differ.empty(), d};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace delib

int main(int argc, char** argv) {
  using namespace delib;
  // Criterion 9 runs before 7 so its training run is also checked for the
  // frozen contract, and before the matrix so its CPU budget is measured
  // on an otherwise idle process.
  const std::vector<Criterion> all{
      {1, "gradient fidelity", gradient_fidelity},
      {2, "mixture algebra", mixture_algebra},
      {3, "scatter oracle", scatter_oracle},
      {4, "fusion oracle", fusion_oracle},
      {5, "exact-match golden suite", golden_suite},
      {6, "parse round trip", parse_round_trip},
      {8, "union counting", union_counting},
      {9, "desk learnability", desk_learnability},
      {7, "frozen contract", frozen_contract},
      {10, "strategy and modality ordering", directional_strategy_and_modality},
      {11, "feature-channel mismatch", directional_mismatch},
      {12, "determinism", cli_determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  std::map<int, std::string> lines;
  int failed = 0;
  for (const Criterion& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    char head[96];
    std::snprintf(head, sizeof(head), "%s criterion %2d  %-32s ", o.pass ? "PASS" : "FAIL", c.id, c.name);
    lines[c.id] = head + o.detail;
    std::printf("%s\n", lines[c.id].c_str());
    std::fflush(stdout);
  }
  std::printf("\nSummary\n");
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%d of %zu criteria failed\n", failed, lines.size());
  std::filesystem::remove_all(work_root() + "/determinism");
  return failed == 0 ? 0 : 1;
}
