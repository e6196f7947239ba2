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

#include "delib/asr_stub.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "delib/error.h"
#include "delib/random.h"

namespace delib {
namespace {

constexpr std::string_view kLetters = "abcdefghijklmnopqrstuvwxyz";

char random_letter(Rng& rng) { return kLetters[rng.below(kLetters.size())]; }

}  // namespace

FrozenTextEncoder::FrozenTextEncoder(size_t vocab_size, size_t dim, uint64_t seed) : dim_(dim) {
  Rng rng(mix_seed(seed, "text-encoder"));
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  table_ = params_.add("text.embedding", normal_init(vocab_size, dim, 1.0, rng));
  input_ = params_.add("text.input", normal_init(dim, dim, scale, rng));
  recurrent_ = params_.add("text.recurrent", normal_init(dim, dim, 0.5 * scale, rng));
  bias_ = params_.add("text.bias", normal_init(1, dim, 0.1, rng));
}

Tensor FrozenTextEncoder::embed(std::span<const int> ids) const {
  const size_t d = dim_;
  Tensor out(ids.size(), d);
  std::vector<double> state(d, 0.0), pre(d);
  auto table = table_.values(), w = input_.values(), u = recurrent_.values(), b = bias_.values();
  for (size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] < 0 || static_cast<size_t>(ids[t]) >= table_.rows()) {
      throw Error(ErrorCode::kIdOutOfRange, "token id " + std::to_string(ids[t]) +
                                                " outside vocabulary of " +
                                                std::to_string(table_.rows()));
    }
    const double* e = table.data() + static_cast<size_t>(ids[t]) * d;
    std::copy(b.begin(), b.end(), pre.begin());
    for (size_t i = 0; i < d; ++i) {
      for (size_t j = 0; j < d; ++j) pre[j] += e[i] * w[i * d + j] + state[i] * u[i * d + j];
    }
    for (size_t j = 0; j < d; ++j) {
      state[j] = std::tanh(pre[j]);
      out.at(t, j) = state[j];
    }
  }
  return out;
}

FrozenAudioEncoder::FrozenAudioEncoder(size_t feature_dim, size_t dim, AsrTier tier, uint64_t seed)
    : feature_dim_(feature_dim), dim_(dim) {
  Rng rng(mix_seed(seed, "audio-encoder"));
  struct Spec {
    size_t in, out, stride;
  };
  std::vector<Spec> specs;
  if (tier == AsrTier::kTier1) {
    specs = {{feature_dim, dim, 2}, {dim, dim, 2}, {dim, dim, 1}};
  } else {
    const size_t narrow = std::max<size_t>(2, dim / 4);
    specs = {{feature_dim, narrow, 2}, {narrow, dim, 2}};
  }
  for (size_t i = 0; i < specs.size(); ++i) {
    const auto [in, out, stride] = specs[i];
    const double stddev = 1.5 / std::sqrt(static_cast<double>(3 * in));
    const std::string name = "audio.conv" + std::to_string(i);
    Conv conv;
    conv.weight = params_.add(name + ".weight", normal_init(3 * in, out, stddev, rng));
    conv.bias = params_.add(name + ".bias", normal_init(1, out, 0.1, rng));
    conv.stride = stride;
    layers_.push_back(std::move(conv));
  }
}

Tensor FrozenAudioEncoder::embed(const Tensor& frames) const {
  if (!frames.defined() || frames.rows() == 0) {
    throw Error(ErrorCode::kEmptyAudio, "no audio frames");
  }
  if (frames.cols() != feature_dim_) {
    throw Error(ErrorCode::kShapeMismatch, "audio features " + frames.shape_string() +
                                               " vs feature dim " + std::to_string(feature_dim_));
  }
  Tensor x = frames;
  for (const Conv& conv : layers_) {
    const size_t in_len = x.rows(), in_ch = x.cols(), out_ch = conv.weight.cols();
    const size_t out_len = (in_len + conv.stride - 1) / conv.stride;
    Tensor y(out_len, out_ch);
    auto xv = x.values(), w = conv.weight.values(), b = conv.bias.values();
    for (size_t t = 0; t < out_len; ++t) {
      double* row = &y.at(t, 0);
      std::copy(b.begin(), b.end(), row);
      const size_t center = t * conv.stride;
      for (size_t tap = 0; tap < 3; ++tap) {
        // Zero padding of one frame on each side.
        if (center + tap < 1 || center + tap - 1 >= in_len) continue;
        const double* src = xv.data() + (center + tap - 1) * in_ch;
        for (size_t c = 0; c < in_ch; ++c) {
          const double* wrow = w.data() + (tap * in_ch + c) * out_ch;
          for (size_t o = 0; o < out_ch; ++o) row[o] += src[c] * wrow[o];
        }
      }
      for (size_t o = 0; o < out_ch; ++o) row[o] = std::tanh(row[o]);
    }
    x = y;
  }
  return x;
}

AsrStub::AsrStub(size_t vocab_size, size_t dim, size_t feature_dim, AsrTier tier, uint64_t seed)
    : text(vocab_size, dim, seed), audio(feature_dim, dim, tier, seed) {}

std::string AsrStub::frozen_bytes() const {
  return text.parameters().value_bytes() + audio.parameters().value_bytes();
}

std::vector<Tensor> AsrStub::frozen_tensors() const {
  std::vector<Tensor> out = text.parameters().tensors();
  for (const Tensor& t : audio.parameters().tensors()) out.push_back(t);
  return out;
}

ConfusionPools parse_confusion_pools(std::string_view text) {
  ConfusionPools pools;
  std::istringstream in{std::string(text)};
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error(ErrorCode::kFormat, "confusion pool line " + std::to_string(lineno) +
                                          " lacks 'word<TAB>alternatives'");
    }
    std::vector<std::string>& alts = pools[line.substr(0, tab)];
    std::istringstream rest(line.substr(tab + 1));
    std::string alt;
    while (std::getline(rest, alt, ',')) {
      if (!alt.empty()) alts.push_back(alt);
    }
  }
  return pools;
}

std::string format_confusion_pools(const ConfusionPools& pools) {
  std::string out;
  for (const auto& [word, alts] : pools) {
    out += word;
    out.push_back('\t');
    for (size_t i = 0; i < alts.size(); ++i) {
      if (i > 0) out.push_back(',');
      out += alts[i];
    }
    out.push_back('\n');
  }
  return out;
}

ConfusionPools load_confusion_pools(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_confusion_pools(buf.str());
}

AsrErrorModel AsrErrorModel::for_target_wer(double target, ConfusionPools pools,
                                            std::vector<std::string> fillers) {
  AsrErrorModel m;
  m.substitution_rate = 0.70 * target;
  m.deletion_rate = 0.15 * target;
  m.insertion_rate = 0.15 * target;
  m.confusion_pools = std::move(pools);
  m.fillers = std::move(fillers);
  m.validate();
  return m;
}

void AsrErrorModel::validate() const {
  for (double r : {substitution_rate, deletion_rate, insertion_rate}) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw Error(ErrorCode::kFractionOutOfRange, "error rate " + std::to_string(r));
    }
  }
  if (substitution_rate + deletion_rate + insertion_rate > 1.0 + 1e-12) {
    throw Error(ErrorCode::kFractionOutOfRange, "error rates sum above 1");
  }
  if (insertion_rate > 0.0 && fillers.empty()) {
    throw Error(ErrorCode::kFractionOutOfRange, "insertions need a filler lexicon");
  }
}

double AsrErrorModel::clean_probability(size_t words) const {
  const double keep = 1.0 - substitution_rate - deletion_rate;
  const double no_insert = 1.0 - insertion_rate;
  double p = std::pow(keep * no_insert, static_cast<double>(words));
  // A lone deleted word is restored.
  if (words == 1) p += deletion_rate * no_insert;
  return p;
}

std::string perturb_word(std::string_view word, Rng& rng) {
  std::string w(word);
  if (w.empty()) return std::string(1, random_letter(rng));
  const uint64_t op = w.size() > 2 ? rng.below(4) : rng.below(2) * 2;  // short: replace/insert
  const size_t pos = rng.below(w.size());
  switch (op) {
    case 0: {  // replace
      char c = random_letter(rng);
      while (c == w[pos]) c = random_letter(rng);
      w[pos] = c;
      break;
    }
    case 1:  // drop
      w.erase(pos, 1);
      break;
    case 2:  // insert
      w.insert(w.begin() + static_cast<std::ptrdiff_t>(pos), random_letter(rng));
      break;
    default: {  // swap with the next differing character
      size_t i = pos;
      while (i + 1 < w.size() && w[i] == w[i + 1]) ++i;
      if (i + 1 < w.size()) {
        std::swap(w[i], w[i + 1]);
      } else {
        char c = random_letter(rng);
        while (c == w[pos]) c = random_letter(rng);
        w[pos] = c;
      }
    }
  }
  return w;
}

std::vector<std::string> corrupt(std::span<const std::string> ref, const AsrErrorModel& model,
                                 uint64_t seed) {
  model.validate();
  Rng rng(seed);
  std::vector<std::string> hyp;
  hyp.reserve(ref.size() + 2);
  for (const std::string& word : ref) {
    const double r = rng.uniform();
    if (r < model.substitution_rate) {
      auto pool = model.confusion_pools.find(word);
      std::string replacement;
      if (pool != model.confusion_pools.end() && !pool->second.empty()) {
        replacement = rng.pick(pool->second);
      }
      if (replacement.empty() || replacement == word) replacement = perturb_word(word, rng);
      hyp.push_back(std::move(replacement));
    } else if (r >= model.substitution_rate + model.deletion_rate) {
      hyp.push_back(word);
    }
    if (model.insertion_rate > 0.0 && rng.bernoulli(model.insertion_rate)) {
      hyp.push_back(rng.pick(model.fillers));
    }
  }
  if (hyp.empty() && !ref.empty()) hyp.push_back(ref.front());
  return hyp;
}

size_t edit_distance(std::span<const std::string> hyp, std::span<const std::string> ref) {
  std::vector<size_t> prev(hyp.size() + 1), cur(hyp.size() + 1);
  for (size_t j = 0; j <= hyp.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= hyp.size(); ++j) {
      const size_t sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[hyp.size()];
}

double wer(std::span<const std::string> hyp, std::span<const std::string> ref) {
  if (ref.empty()) throw Error(ErrorCode::kEmptyReference, "WER needs a non-empty reference");
  return static_cast<double>(edit_distance(hyp, ref)) / static_cast<double>(ref.size());
}

}  // namespace delib
