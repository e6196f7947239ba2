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

// delib: command-line entry point.
//
//   delib datagen     --out DIR [--n N] [--wer W] [--channel C]
//   delib build-vocab --out DIR --data DIR [--text-pieces N]
//   delib train       --out DIR --data DIR [--vocab FILE] [--modality M] [--strategy S]
//   delib eval        --out DIR --data DIR --vocab FILE --checkpoint FILE
//   delib matrix      --out DIR [--cells LIST] [--seeds LIST] [--jobs N]
//   delib gradcheck   [--preset toy]
//   delib em          --hyp FILE --ref FILE
//   delib inspect     --data DIR --vocab FILE --checkpoint FILE --id ID
//
// Every command starts from --config (or the defaults), applies --preset,
// then the flags, and writes the resolved config to DIR/config.ini.
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "delib/config.h"
#include "delib/error.h"
#include "delib/eval.h"
#include "delib/experiment.h"
#include "delib/parse.h"

namespace {

using namespace delib;

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct Common {
  std::string config;
  std::string out;
  uint64_t seed = 0;
  size_t jobs = 1;
  std::string preset;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* jobs_opt = nullptr;
};

void add_common(CLI::App* cmd, Common& c, bool out_required) {
  cmd->add_option("--config", c.config, "Run config (INI)")->check(CLI::ExistingFile);
  auto* out = cmd->add_option("--out", c.out, "Output directory");
  if (out_required) out->required();
  c.seed_opt = cmd->add_option("--seed", c.seed, "Root seed");
  c.jobs_opt = cmd->add_option("--jobs", c.jobs, "Worker threads (matrix cells)");
  cmd->add_option("--preset", c.preset, "Model preset")
      ->check(CLI::IsMember({"toy", "desk", "paper-scale"}));
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig::defaults() : RunConfig::load(c.config);
  if (!c.preset.empty()) cfg.apply_preset(c.preset);
  if (c.seed_opt->count() > 0) cfg.seed = c.seed;
  if (c.jobs_opt->count() > 0) cfg.jobs = c.jobs;
  return cfg;
}

std::string absolute(const std::string& path) {
  return path.empty() ? path : std::filesystem::absolute(path).lexically_normal().string();
}

void save_config(const RunConfig& cfg, const std::string& out) {
  if (out.empty()) return;
  ensure_dir(out);
  cfg.save(out + "/config.ini");
}

std::string need(const std::string& value, const char* flag) {
  if (value.empty()) throw Error(ErrorCode::kUsage, std::string(flag) + " is required");
  return value;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<uint64_t> parse_seeds(const std::string& list) {
  std::vector<uint64_t> seeds;
  std::stringstream in(list);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (item.find_first_not_of(" ", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kUsage, "--seeds: bad seed '" + item + "'");
    }
  }
  return seeds;
}

const std::vector<UtteranceRecord>& pick_split(const DatasetSplits& data, const std::string& name) {
  if (name == "train") return data.train;
  if (name == "valid") return data.valid;
  if (name == "test") return data.test;
  throw Error(ErrorCode::kUsage, "--split must be train, valid or test");
}

std::string top_tokens(const std::vector<double>& dist, const Vocabulary& vocab, size_t k) {
  std::vector<size_t> order(dist.size());
  std::iota(order.begin(), order.end(), size_t{0});
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](size_t a, size_t b) { return dist[a] > dist[b]; });
  std::string s;
  char buf[32];
  for (size_t i = 0; i < k; ++i) {
    if (dist[order[i]] <= 0.0) break;
    std::snprintf(buf, sizeof(buf), "%.3f", dist[order[i]]);
    s += (s.empty() ? "" : " ") + vocab.token(static_cast<int>(order[i])) + "=" + buf;
  }
  return s.empty() ? "-" : s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deliberation-based spoken language understanding on synthetic corpora"};
  app.require_subcommand(1);
  std::function<void()> run;

  // datagen
  Common dg;
  size_t dg_n = 0;
  double dg_wer = 0.0;
  std::string dg_channel, dg_tier;
  auto* datagen = app.add_subcommand("datagen", "Generate train/valid/test JSONL splits");
  add_common(datagen, dg, true);
  auto* dg_n_opt = datagen->add_option("--n", dg_n, "Number of utterances");
  auto* dg_wer_opt = datagen->add_option("--wer", dg_wer, "Target word error rate of the channel");
  datagen->add_option("--channel", dg_channel, "Audio channel of the train split")
      ->check(CLI::IsMember({"natural", "mismatched"}));
  datagen->add_option("--tier", dg_tier, "ASR tier")->check(CLI::IsMember({"tier1", "tier2"}));
  datagen->callback([&] {
    run = [&] {
      RunConfig cfg = resolve(dg);
      if (dg_n_opt->count() > 0) cfg.data.n = dg_n;
      if (dg_wer_opt->count() > 0) cfg.asr.target_wer = dg_wer;
      if (!dg_channel.empty()) cfg.data.train_channel = parse_channel(dg_channel);
      if (!dg_tier.empty()) cfg.asr.tier = parse_tier(dg_tier);
      cfg.data_dir = absolute(dg.out);
      const DatasetSplits data = generate_dataset(cfg);
      save_dataset(data, dg.out);
      save_config(cfg, dg.out);
      std::printf("train %zu (%zu with ASR errors)  valid %zu  test %zu (%zu with ASR errors)\n",
                  data.train.size(), count_errors(data.train), data.valid.size(),
                  data.test.size(), count_errors(data.test));
    };
  });

  // build-vocab
  Common bv;
  std::string bv_data;
  size_t bv_pieces = 0;
  auto* build_vocab = app.add_subcommand("build-vocab", "Build the joint vocabulary");
  add_common(build_vocab, bv, true);
  build_vocab->add_option("--data", bv_data, "Dataset directory (train.jsonl is read)");
  auto* bv_pieces_opt = build_vocab->add_option("--text-pieces", bv_pieces, "Target text pieces");
  build_vocab->callback([&] {
    run = [&] {
      RunConfig cfg = resolve(bv);
      if (!bv_data.empty()) cfg.data_dir = absolute(bv_data);
      if (bv_pieces_opt->count() > 0) cfg.text_pieces = bv_pieces;
      const auto train = read_jsonl(need(cfg.data_dir, "--data") + "/train.jsonl");
      const Vocabulary vocab = build_vocabulary(train, cfg.text_pieces);
      ensure_dir(bv.out);
      vocab.save(bv.out + "/vocab.txt");
      cfg.vocab_path = absolute(bv.out + "/vocab.txt");
      save_config(cfg, bv.out);
      std::printf("vocabulary %zu tokens: %zu text pieces, %zu ontology tokens\n", vocab.size(),
                  vocab.num_text_pieces(), vocab.num_ontology_tokens());
    };
  });

  // train
  Common tr;
  std::string tr_data, tr_vocab, tr_modality, tr_strategy;
  size_t tr_epochs = 0, tr_batch = 0, tr_patience = 0;
  double tr_lr = 0.0;
  auto* train_cmd = app.add_subcommand("train", "Train a deliberation model");
  add_common(train_cmd, tr, true);
  train_cmd->add_option("--data", tr_data, "Dataset directory");
  train_cmd->add_option("--vocab", tr_vocab, "Vocabulary file (built from train when absent)");
  train_cmd->add_option("--modality", tr_modality, "fusion, text or audio")
      ->check(CLI::IsMember({"fusion", "text", "text-only", "audio", "audio-only"}));
  train_cmd->add_option("--strategy", tr_strategy, "hyp, ref or union")
      ->check(CLI::IsMember({"hyp", "ref", "union"}));
  auto* tr_epochs_opt = train_cmd->add_option("--epochs", tr_epochs, "Maximum epochs");
  auto* tr_batch_opt = train_cmd->add_option("--batch-size", tr_batch, "Utterances per step");
  auto* tr_patience_opt =
      train_cmd->add_option("--patience", tr_patience, "Early-stopping patience (0 disables)");
  auto* tr_lr_opt = train_cmd->add_option("--lr", tr_lr, "Adam learning rate");
  train_cmd->callback([&] {
    run = [&] {
      RunConfig cfg = resolve(tr);
      if (!tr_data.empty()) cfg.data_dir = absolute(tr_data);
      if (!tr_vocab.empty()) cfg.vocab_path = absolute(tr_vocab);
      if (!tr_modality.empty()) cfg.model.modality = parse_modality(tr_modality);
      if (!tr_strategy.empty()) cfg.train.strategy = parse_strategy(tr_strategy);
      if (tr_epochs_opt->count() > 0) cfg.train.epochs = tr_epochs;
      if (tr_batch_opt->count() > 0) cfg.train.batch_size = tr_batch;
      if (tr_patience_opt->count() > 0) cfg.train.patience = tr_patience;
      if (tr_lr_opt->count() > 0) cfg.train.learning_rate = tr_lr;
      const DatasetSplits data = load_dataset(need(cfg.data_dir, "--data"));
      ensure_dir(tr.out);
      const Vocabulary vocab = cfg.vocab_path.empty() ? build_vocabulary(data.train, cfg.text_pieces)
                                                      : Vocabulary::load(cfg.vocab_path);
      // The run directory is self-contained: it always holds its vocabulary.
      vocab.save(tr.out + "/vocab.txt");
      cfg.vocab_path = absolute(tr.out + "/vocab.txt");
      const AsrStub stub = make_stub(cfg, vocab);
      const Featurizer featurizer(stub, vocab);
      auto model = make_model(cfg, vocab);
      std::printf("%s model, %zu trainable parameters\n",
                  std::string(to_string(cfg.model.modality)).c_str(), model->param_count());
      const TrainResult result =
          train(*model, featurizer, data.train, data.valid, train_config(cfg), tr.out);
      cfg.checkpoint_path = absolute(tr.out + "/best.ckpt");
      save_config(cfg, tr.out);
      std::printf("best epoch %zu, valid EM %.4f after %zu epochs%s\n", result.best_epoch,
                  result.best_valid_em, result.epochs.size(),
                  result.early_stopped ? " (early stop)" : "");
    };
  });

  // eval
  Common ev;
  std::string ev_data, ev_vocab, ev_ckpt, ev_split = "test";
  auto* eval_cmd = app.add_subcommand("eval", "Exact-match evaluation of a checkpoint");
  add_common(eval_cmd, ev, true);
  eval_cmd->add_option("--data", ev_data, "Dataset directory");
  eval_cmd->add_option("--vocab", ev_vocab, "Vocabulary file");
  eval_cmd->add_option("--checkpoint", ev_ckpt, "Checkpoint file");
  eval_cmd->add_option("--split", ev_split, "train, valid or test");
  eval_cmd->callback([&] {
    run = [&] {
      RunConfig cfg = resolve(ev);
      if (!ev_data.empty()) cfg.data_dir = absolute(ev_data);
      if (!ev_vocab.empty()) cfg.vocab_path = absolute(ev_vocab);
      if (!ev_ckpt.empty()) cfg.checkpoint_path = absolute(ev_ckpt);
      const DatasetSplits data = load_dataset(need(cfg.data_dir, "--data"));
      const auto& records = pick_split(data, ev_split);
      const Vocabulary vocab = Vocabulary::load(need(cfg.vocab_path, "--vocab"));
      const AsrStub stub = make_stub(cfg, vocab);
      const Featurizer featurizer(stub, vocab);
      uint64_t digest = 0;
      auto model = load_model(cfg, vocab, need(cfg.checkpoint_path, "--checkpoint"), &digest);
      const EvalReport report = evaluate(*model, digest, featurizer, records);
      ensure_dir(ev.out);
      std::string predictions;
      for (const std::string& p : report.predictions) predictions += p + "\n";
      write_file(ev.out + "/predictions.anno", predictions);
      write_file(ev.out + "/report.json", summary_json(report) + "\n");
      save_config(cfg, ev.out);
      std::printf("EM %.4f  no_error %.4f (%zu)  error %.4f (%zu)\n", report.em_overall,
                  report.em_no_error, report.n_no_error, report.em_error, report.n_error);
    };
  });

  // matrix
  Common mx;
  std::string mx_cells, mx_seeds;
  auto* matrix = app.add_subcommand("matrix", "Train and evaluate a grid of configurations");
  add_common(matrix, mx, true);
  matrix->add_option("--cells", mx_cells, "Comma list of tier:modality:strategy:channel");
  matrix->add_option("--seeds", mx_seeds, "Comma list of seeds");
  matrix->callback([&] {
    run = [&] {
      RunConfig cfg = resolve(mx);
      if (!mx_cells.empty()) {
        cfg.matrix.cells.clear();
        std::stringstream in(mx_cells);
        for (std::string item; std::getline(in, item, ',');) {
          cfg.matrix.cells.push_back(CellSpec::parse(item));
        }
      }
      if (!mx_seeds.empty()) cfg.matrix.seeds = parse_seeds(mx_seeds);
      save_config(cfg, mx.out);
      const MatrixReport report = run_matrix(cfg, mx.out, cfg.jobs);
      write_file(mx.out + "/report.csv", format_csv(report));
      const std::string table = format_table(report);
      write_file(mx.out + "/report.txt", table);
      std::fputs(table.c_str(), stdout);
      for (const MatrixRow& row : report.rows) {
        if (!row.error.empty()) throw Error(ErrorCode::kIo, "some cells failed, see report.txt");
      }
    };
  });

  // gradcheck
  Common gc;
  std::string gc_modality = "fusion";
  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  add_common(gradcheck_cmd, gc, false);
  gradcheck_cmd->add_option("--modality", gc_modality, "fusion, text or audio")
      ->check(CLI::IsMember({"fusion", "text", "text-only", "audio", "audio-only"}));
  gradcheck_cmd->callback([&] {
    run = [&] {
      RunConfig cfg = resolve(gc);
      if (gc.preset.empty()) cfg.apply_preset("toy");
      cfg.model.modality = parse_modality(gc_modality);
      const GradcheckResult r = gradcheck_model(cfg.preset, cfg.model.modality, cfg.seed);
      char line[160];
      std::snprintf(line, sizeof(line), "max rel error %.3e over %zu parameters (%.1f s)\n%s\n",
                    r.max_rel_error, r.parameters, r.seconds,
                    r.max_rel_error < 1e-3 ? "PASS" : "FAIL");
      std::fputs(line, stdout);
      if (!gc.out.empty()) {
        save_config(cfg, gc.out);
        write_file(gc.out + "/gradcheck.txt", line);
      }
      if (r.max_rel_error >= 1e-3) throw Error(ErrorCode::kNonFiniteValue, "gradcheck failed");
    };
  });

  // em
  Common em;
  std::string em_hyp, em_ref;
  auto* em_cmd = app.add_subcommand("em", "Exact match between two annotation files");
  add_common(em_cmd, em, false);
  em_cmd->add_option("--hyp", em_hyp, "Predicted annotations, one per line")
      ->required()
      ->check(CLI::ExistingFile);
  em_cmd->add_option("--ref", em_ref, "Reference annotations, one per line")
      ->required()
      ->check(CLI::ExistingFile);
  em_cmd->callback([&] {
    run = [&] {
      const RunConfig cfg = resolve(em);
      const auto hyp = read_lines(em_hyp);
      const auto ref = read_lines(em_ref);
      if (hyp.size() != ref.size()) {
        throw Error(ErrorCode::kLengthMismatch, std::to_string(hyp.size()) + " hypotheses vs " +
                                                    std::to_string(ref.size()) + " references");
      }
      size_t hits = 0;
      for (size_t i = 0; i < hyp.size(); ++i) hits += exact_match(hyp[i], ref[i]) ? 1 : 0;
      const double rate = hyp.empty() ? 0.0 : static_cast<double>(hits) / hyp.size();
      char line[64];
      std::snprintf(line, sizeof(line), "EM %.4f\n", rate);
      std::fputs(line, stdout);
      if (!em.out.empty()) {
        save_config(cfg, em.out);
        write_file(em.out + "/em.txt", line);
      }
    };
  });

  // inspect
  Common in;
  std::string in_data, in_vocab, in_ckpt, in_id, in_split = "test";
  size_t in_top = 3;
  auto* inspect = app.add_subcommand("inspect", "Decode one utterance step by step");
  add_common(inspect, in, false);
  inspect->add_option("--data", in_data, "Dataset directory");
  inspect->add_option("--vocab", in_vocab, "Vocabulary file");
  inspect->add_option("--checkpoint", in_ckpt, "Checkpoint file");
  inspect->add_option("--split", in_split, "train, valid or test");
  inspect->add_option("--id", in_id, "Utterance id (default: first errorful record)");
  inspect->add_option("--top", in_top, "Entries shown per distribution");
  inspect->callback([&] {
    run = [&] {
      RunConfig cfg = resolve(in);
      if (!in_data.empty()) cfg.data_dir = absolute(in_data);
      if (!in_vocab.empty()) cfg.vocab_path = absolute(in_vocab);
      if (!in_ckpt.empty()) cfg.checkpoint_path = absolute(in_ckpt);
      const DatasetSplits data = load_dataset(need(cfg.data_dir, "--data"));
      const auto& records = pick_split(data, in_split);
      auto it = std::find_if(records.begin(), records.end(), [&](const UtteranceRecord& r) {
        return in_id.empty() ? r.has_asr_error : r.id == in_id;
      });
      if (it == records.end()) throw Error(ErrorCode::kUsage, "--id: no such utterance");
      const Vocabulary vocab = Vocabulary::load(need(cfg.vocab_path, "--vocab"));
      const AsrStub stub = make_stub(cfg, vocab);
      const Featurizer featurizer(stub, vocab);
      uint64_t digest = 0;
      auto model = load_model(cfg, vocab, need(cfg.checkpoint_path, "--checkpoint"), &digest);
      if (digest != vocab.digest()) throw Error(ErrorCode::kVocabMismatch, "checkpoint vocabulary");

      std::string report = "id         " + it->id + "\nreference  " + join_words(it->reference_text) +
                           "\nhypothesis " + join_words(it->hypothesis_text) + "\ntarget     " +
                           it->target_annotation + "\n\n";
      NoGradScope no_grad;
      const ModelInputs inputs = featurizer.inputs(*it, true, model->config().modality);
      const Tensor encoded = model->encode(inputs);
      DecoderCache cache;
      std::vector<int> out;
      int token = Vocabulary::kBos;
      char buf[96];
      for (size_t step = 0; step < model->config().max_decode_length; ++step) {
        const Tensor state = model->extend_decoder(cache, encoded, token);
        const DecoderStepOutput o = model->decode_step(state, encoded, inputs.hypothesis);
        token = static_cast<int>(std::max_element(o.o.begin(), o.o.end()) - o.o.begin());
        std::snprintf(buf, sizeof(buf), "step %2zu  %-16s p_copy %.3f\n", step,
                      vocab.token(token).c_str(), o.p_copy);
        report += buf;
        report += "    g  " + top_tokens(o.g, vocab, in_top) + "\n";
        if (model->config().has_copy()) report += "    c  " + top_tokens(o.c, vocab, in_top) + "\n";
        if (token == Vocabulary::kEos) break;
        out.push_back(token);
      }
      const std::string prediction = vocab.decode_annotation(out);
      report += "\nprediction " + prediction + "\nexact match " +
                (exact_match(prediction, it->target_annotation) ? "yes" : "no") + "\n";
      std::fputs(report.c_str(), stdout);
      if (!in.out.empty()) {
        save_config(cfg, in.out);
        write_file(in.out + "/inspect.txt", report);
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  try {
    run();
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == ErrorCode::kUsage ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
