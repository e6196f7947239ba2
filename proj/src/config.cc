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

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "delib/error.h"

namespace delib {
namespace {

namespace pt = boost::property_tree;

std::string fmt_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw Error(ErrorCode::kUsage, key + ": expected a number, got '" + s + "'");
  }
  return v;
}

uint64_t to_u64(const std::string& key, const std::string& s) {
  uint64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw Error(ErrorCode::kUsage, key + ": expected an unsigned integer, got '" + s + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw Error(ErrorCode::kUsage, key + ": expected true or false, got '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const size_t b = item.find_first_not_of(" \t");
    const size_t e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

// One table drives both directions so reader and writer cannot drift.
struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
  bool digested = true;
};

const std::vector<Field>& fields() {
  using C = RunConfig;
  auto sz = [](std::string s, std::string k, std::function<size_t&(C&)> ref) {
    return Field{s, k, [ref](const C& c) { return std::to_string(ref(const_cast<C&>(c))); },
                 [ref, k](C& c, const std::string& v) { ref(c) = to_u64(k, v); }};
  };
  auto dbl = [](std::string s, std::string k, std::function<double&(C&)> ref) {
    return Field{s, k, [ref](const C& c) { return fmt_double(ref(const_cast<C&>(c))); },
                 [ref, k](C& c, const std::string& v) { ref(c) = to_double(k, v); }};
  };
  static const std::vector<Field> table = [&] {
    std::vector<Field> f;
    f.push_back(Field{"run", "seed", [](const C& c) { return std::to_string(c.seed); },
                      [](C& c, const std::string& v) { c.seed = to_u64("seed", v); }});
    f.push_back(sz("run", "jobs", [](C& c) -> size_t& { return c.jobs; }));
    f.back().digested = false;
    for (auto [key, member] : {std::pair{"data_dir", &C::data_dir}, std::pair{"vocab", &C::vocab_path},
                               std::pair{"checkpoint", &C::checkpoint_path}}) {
      f.push_back(Field{"paths", key, [member](const C& c) { return c.*member; },
                        [member](C& c, const std::string& v) { c.*member = v; }, false});
    }
    f.push_back(sz("data", "n", [](C& c) -> size_t& { return c.data.n; }));
    f.push_back(dbl("data", "train_ratio", [](C& c) -> double& { return c.data.ratios.train; }));
    f.push_back(dbl("data", "valid_ratio", [](C& c) -> double& { return c.data.ratios.valid; }));
    f.push_back(dbl("data", "test_ratio", [](C& c) -> double& { return c.data.ratios.test; }));
    f.push_back(dbl("data", "compositional_fraction",
                    [](C& c) -> double& { return c.data.compositional_fraction; }));
    f.push_back(Field{"data", "train_channel",
                      [](const C& c) { return std::string(to_string(c.data.train_channel)); },
                      [](C& c, const std::string& v) { c.data.train_channel = parse_channel(v); }});
    f.push_back(sz("data", "feature_dim", [](C& c) -> size_t& { return c.data.audio.feature_dim; }));
    f.push_back(sz("data", "frames_per_word",
                   [](C& c) -> size_t& { return c.data.audio.frames_per_word; }));
    f.push_back(sz("data", "jitter", [](C& c) -> size_t& { return c.data.audio.jitter; }));
    f.push_back(dbl("data", "noise", [](C& c) -> double& { return c.data.audio.noise; }));
    f.push_back(sz("data", "mismatched_frames_per_word",
                   [](C& c) -> size_t& { return c.data.audio.mismatched_frames_per_word; }));
    f.push_back(sz("data", "mismatched_jitter",
                   [](C& c) -> size_t& { return c.data.audio.mismatched_jitter; }));
    f.push_back(dbl("data", "mismatched_noise",
                    [](C& c) -> double& { return c.data.audio.mismatched_noise; }));
    f.push_back(dbl("data", "mismatched_base_scale",
                    [](C& c) -> double& { return c.data.audio.mismatched_base_scale; }));
    f.push_back(dbl("data", "mismatched_voice_scale",
                    [](C& c) -> double& { return c.data.audio.mismatched_voice_scale; }));
    f.push_back(dbl("data", "mismatched_offset_scale",
                    [](C& c) -> double& { return c.data.audio.mismatched_offset_scale; }));
    f.push_back(Field{"asr", "tier", [](const C& c) { return std::string(to_string(c.asr.tier)); },
                      [](C& c, const std::string& v) { c.asr.tier = parse_tier(v); }});
    f.push_back(sz("asr", "dim", [](C& c) -> size_t& { return c.asr.dim; }));
    f.push_back(dbl("asr", "target_wer", [](C& c) -> double& { return c.asr.target_wer; }));
    f.push_back(sz("vocab", "text_pieces", [](C& c) -> size_t& { return c.text_pieces; }));
    f.push_back(Field{"model", "preset", [](const C& c) { return c.preset; },
                      [](C& c, const std::string& v) { c.preset = v; }});
    f.push_back(Field{"model", "modality",
                      [](const C& c) { return std::string(to_string(c.model.modality)); },
                      [](C& c, const std::string& v) { c.model.modality = parse_modality(v); }});
    f.push_back(sz("model", "dim", [](C& c) -> size_t& { return c.model.dim; }));
    f.push_back(sz("model", "fusion_heads", [](C& c) -> size_t& { return c.model.fusion_heads; }));
    f.push_back(sz("model", "pooling_layers", [](C& c) -> size_t& { return c.model.pooling_layers; }));
    f.push_back(sz("model", "pooling_heads", [](C& c) -> size_t& { return c.model.pooling_heads; }));
    f.push_back(sz("model", "ffn_dim", [](C& c) -> size_t& { return c.model.ffn_dim; }));
    f.push_back(sz("model", "decoder_layers", [](C& c) -> size_t& { return c.model.decoder_layers; }));
    f.push_back(sz("model", "decoder_heads", [](C& c) -> size_t& { return c.model.decoder_heads; }));
    f.push_back(sz("model", "copy_heads", [](C& c) -> size_t& { return c.model.copy_heads; }));
    f.push_back(sz("model", "max_decode_length",
                   [](C& c) -> size_t& { return c.model.max_decode_length; }));
    f.push_back(Field{"train", "strategy",
                      [](const C& c) { return std::string(to_string(c.train.strategy)); },
                      [](C& c, const std::string& v) { c.train.strategy = parse_strategy(v); }});
    f.push_back(sz("train", "epochs", [](C& c) -> size_t& { return c.train.epochs; }));
    f.push_back(sz("train", "batch_size", [](C& c) -> size_t& { return c.train.batch_size; }));
    f.push_back(dbl("train", "learning_rate", [](C& c) -> double& { return c.train.learning_rate; }));
    f.push_back(dbl("train", "label_smoothing",
                    [](C& c) -> double& { return c.train.label_smoothing; }));
    f.push_back(sz("train", "patience", [](C& c) -> size_t& { return c.train.patience; }));
    f.push_back(sz("train", "time_masks", [](C& c) -> size_t& { return c.train.spec_augment.time_masks; }));
    f.push_back(sz("train", "max_time_width",
                   [](C& c) -> size_t& { return c.train.spec_augment.max_time_width; }));
    f.push_back(sz("train", "feature_masks",
                   [](C& c) -> size_t& { return c.train.spec_augment.feature_masks; }));
    f.push_back(sz("train", "max_feature_width",
                   [](C& c) -> size_t& { return c.train.spec_augment.max_feature_width; }));
    f.push_back(Field{"train", "exact_mask_widths",
                      [](const C& c) { return fmt_bool(c.train.spec_augment.exact_widths); },
                      [](C& c, const std::string& v) {
                        c.train.spec_augment.exact_widths = to_bool("exact_mask_widths", v);
                      }});
    f.push_back(Field{"matrix", "seeds",
                      [](const C& c) {
                        std::string s;
                        for (uint64_t seed : c.matrix.seeds) {
                          if (!s.empty()) s += ", ";
                          s += std::to_string(seed);
                        }
                        return s;
                      },
                      [](C& c, const std::string& v) {
                        c.matrix.seeds.clear();
                        for (const std::string& s : split_list(v)) c.matrix.seeds.push_back(to_u64("seeds", s));
                      }});
    f.push_back(Field{"matrix", "cells",
                      [](const C& c) {
                        std::string s;
                        for (const CellSpec& cell : c.matrix.cells) {
                          if (!s.empty()) s += ", ";
                          s += cell.key();
                        }
                        return s;
                      },
                      [](C& c, const std::string& v) {
                        c.matrix.cells.clear();
                        for (const std::string& s : split_list(v)) c.matrix.cells.push_back(CellSpec::parse(s));
                      }});
    f.push_back(dbl("matrix", "tier1_wer", [](C& c) -> double& { return c.matrix.tier1_wer; }));
    f.push_back(dbl("matrix", "tier2_wer", [](C& c) -> double& { return c.matrix.tier2_wer; }));
    return f;
  }();
  return table;
}

std::string render(const RunConfig& c, bool digest_only) {
  std::string out, section;
  for (const Field& f : fields()) {
    if (digest_only && !f.digested) continue;
    if (f.section != section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.get(c) + "\n";
  }
  return out;
}

}  // namespace

std::string_view to_string(AsrTier tier) { return tier == AsrTier::kTier1 ? "tier1" : "tier2"; }

AsrTier parse_tier(std::string_view s) {
  if (s == "tier1" || s == "1") return AsrTier::kTier1;
  if (s == "tier2" || s == "2") return AsrTier::kTier2;
  throw Error(ErrorCode::kUsage, "unknown ASR tier '" + std::string(s) + "'");
}

std::string CellSpec::key() const {
  return std::string(to_string(tier)) + ":" + std::string(to_string(modality)) + ":" +
         std::string(to_string(strategy)) + ":" + std::string(to_string(channel));
}

CellSpec CellSpec::parse(std::string_view s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  if (parts.size() != 4) {
    throw Error(ErrorCode::kUsage, "cell '" + std::string(s) + "' is not tier:modality:strategy:channel");
  }
  return {parse_tier(parts[0]), parse_modality(parts[1]), parse_strategy(parts[2]),
          parse_channel(parts[3])};
}

RunConfig RunConfig::defaults(std::string_view preset) {
  RunConfig c;
  c.train.learning_rate = 1e-3;
  c.train.epochs = 60;
  c.train.patience = 10;
  // Union against Hyp and Ref on fusion, the three modalities, and the
  // mismatched training channel for audio and fusion.
  for (const char* key : {"tier1:fusion:hyp:natural", "tier1:fusion:ref:natural",
                          "tier1:fusion:union:natural", "tier1:text:union:natural",
                          "tier1:audio:ref:natural", "tier1:audio:ref:mismatched",
                          "tier1:fusion:union:mismatched"}) {
    c.matrix.cells.push_back(CellSpec::parse(key));
  }
  c.apply_preset(preset);
  return c;
}

void RunConfig::apply_preset(std::string_view name) {
  const ModelConfig p = ModelConfig::preset(name, model.modality, 0);
  preset = std::string(name);
  model = p;
  asr.dim = p.asr_dim;
}

std::string RunConfig::to_ini() const { return render(*this, false); }

RunConfig RunConfig::from_ini(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kUsage, std::string("config: ") + e.what());
  }
  RunConfig c = defaults();
  // The preset goes first so explicit model keys override it.
  if (auto p = tree.get_optional<std::string>("model.preset")) c.apply_preset(*p);
  if (auto m = tree.get_optional<std::string>("model.modality")) c.model.modality = parse_modality(*m);
  std::map<std::string, const Field*> index;
  for (const Field& f : fields()) index[f.section + "." + f.key] = &f;
  for (const auto& [section, body] : tree) {
    for (const auto& [key, value] : body) {
      auto it = index.find(section + "." + key);
      if (it == index.end()) throw Error(ErrorCode::kUsage, "unknown config key " + section + "." + key);
      it->second->set(c, value.get_value<std::string>());
    }
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_ini(buf.str());
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << to_ini();
}

uint64_t RunConfig::digest() const { return fnv1a(render(*this, true)); }

ModelConfig RunConfig::model_config(size_t vocab_size) const {
  ModelConfig m = model;
  m.asr_dim = asr.dim;
  m.vocab_size = vocab_size;
  return m;
}

}  // namespace delib
