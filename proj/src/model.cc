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

#include "delib/model.h"

#include <algorithm>

#include "delib/error.h"
#include "delib/tokenizer.h"

namespace delib {
namespace {

constexpr double kLogFloor = 1e-12;

size_t linear_count(size_t in, size_t out) { return in * out + out; }
size_t norm_count(size_t d) { return 2 * d; }
size_t mha_count(size_t d) { return 4 * linear_count(d, d) - d; }  // no key bias
size_t ffn_count(size_t d, size_t inner) { return linear_count(d, inner) + linear_count(inner, d); }

void check_heads(size_t dim, size_t heads, const char* what) {
  if (heads == 0 || dim % heads != 0) {
    throw Error(ErrorCode::kHeadsDontDivide, std::string(what) + ": " + std::to_string(heads) +
                                                 " heads for dimension " + std::to_string(dim));
  }
}

std::vector<double> row_values(const Tensor& t, size_t r) {
  auto v = t.values();
  return {v.begin() + static_cast<std::ptrdiff_t>(r * t.cols()),
          v.begin() + static_cast<std::ptrdiff_t>((r + 1) * t.cols())};
}

}  // namespace

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::kFusion: return "fusion";
    case Modality::kTextOnly: return "text";
    case Modality::kAudioOnly: return "audio";
  }
  return "unknown";
}

Modality parse_modality(std::string_view s) {
  if (s == "fusion") return Modality::kFusion;
  if (s == "text" || s == "text-only") return Modality::kTextOnly;
  if (s == "audio" || s == "audio-only") return Modality::kAudioOnly;
  throw Error(ErrorCode::kUsage, "unknown modality '" + std::string(s) + "'");
}

ModelConfig ModelConfig::preset(std::string_view name, Modality modality, size_t vocab_size) {
  ModelConfig c;
  c.modality = modality;
  c.vocab_size = vocab_size;
  if (name == "toy") {
    c.asr_dim = 16;
    c.dim = 16;
    c.fusion_heads = 4;
    c.pooling_layers = 2;
    c.pooling_heads = 4;
    c.ffn_dim = 32;
    c.max_decode_length = 32;
  } else if (name == "desk") {
    c.asr_dim = 32;
    c.dim = 32;
    c.fusion_heads = 4;
    c.pooling_layers = 2;
    c.pooling_heads = 4;
    c.ffn_dim = 64;
  } else if (name == "paper-scale") {
    c.asr_dim = 256;
    c.dim = modality == Modality::kFusion ? 224 : modality == Modality::kTextOnly ? 240 : 256;
    c.fusion_heads = 8;
    c.pooling_layers = 2;
    c.pooling_heads = 8;
    c.ffn_dim = 4 * c.dim;
    c.max_decode_length = 128;
  } else {
    throw Error(ErrorCode::kUsage, "unknown preset '" + std::string(name) + "'");
  }
  c.decoder_layers = 1;
  c.decoder_heads = 2;
  c.copy_heads = 1;
  return c;
}

void ModelConfig::validate() const {
  if (vocab_size <= static_cast<size_t>(Vocabulary::kNumSpecials)) {
    throw Error(ErrorCode::kShapeMismatch, "vocabulary of " + std::to_string(vocab_size));
  }
  if (has_fusion()) check_heads(asr_dim, fusion_heads, "fusion");
  check_heads(dim, pooling_heads, "pooling");
  check_heads(dim, decoder_heads, "decoder");
  if (has_copy()) check_heads(dim, copy_heads, "copy");
}

size_t param_count(const ModelConfig& c) {
  size_t n = 0;
  if (c.needs_projection()) n += linear_count(c.asr_dim, c.dim);
  if (c.has_fusion()) n += mha_count(c.asr_dim) + linear_count(2 * c.asr_dim, c.asr_dim);
  n += c.pooling_layers * (2 * norm_count(c.dim) + mha_count(c.dim) + ffn_count(c.dim, c.ffn_dim));
  n += c.vocab_size * c.dim;
  n += c.decoder_layers *
       (3 * norm_count(c.dim) + 2 * mha_count(c.dim) + ffn_count(c.dim, c.ffn_dim));
  n += norm_count(c.dim);
  n += linear_count(c.dim, c.vocab_size);
  if (c.has_copy()) n += mha_count(c.dim) + linear_count(2 * c.dim, 1);
  return n;
}

DeliberationModel::DeliberationModel(const ModelConfig& config, uint64_t seed)
    : config_(config) {
  config_.validate();
  Rng rng(mix_seed(seed, "deliberation-model"));
  const ModelConfig& c = config_;
  if (c.needs_projection()) {
    input_projection_ = Linear(params_, "input.projection", c.asr_dim, c.dim, rng);
  }
  if (c.has_fusion()) {
    fusion_attention_ = MultiHeadAttention(params_, "fusion.attention", c.asr_dim, c.fusion_heads, rng);
    fusion_projection_ = Linear(params_, "fusion.projection", 2 * c.asr_dim, c.asr_dim, rng);
  }
  for (size_t i = 0; i < c.pooling_layers; ++i) {
    const std::string p = "pooling." + std::to_string(i);
    EncoderLayer layer;
    layer.attention_norm = LayerNorm(params_, p + ".attention_norm", c.dim);
    layer.attention = MultiHeadAttention(params_, p + ".attention", c.dim, c.pooling_heads, rng);
    layer.ffn_norm = LayerNorm(params_, p + ".ffn_norm", c.dim);
    layer.ffn = FeedForward(params_, p + ".ffn", c.dim, c.ffn_dim, rng);
    pooling_.push_back(std::move(layer));
  }
  target_embedding_ = params_.add("decoder.embedding", normal_init(c.vocab_size, c.dim, 0.5, rng));
  for (size_t i = 0; i < c.decoder_layers; ++i) {
    const std::string p = "decoder." + std::to_string(i);
    DecoderLayer layer;
    layer.self_norm = LayerNorm(params_, p + ".self_norm", c.dim);
    layer.self_attention = MultiHeadAttention(params_, p + ".self_attention", c.dim, c.decoder_heads, rng);
    layer.cross_norm = LayerNorm(params_, p + ".cross_norm", c.dim);
    layer.cross_attention = MultiHeadAttention(params_, p + ".cross_attention", c.dim, c.decoder_heads, rng);
    layer.ffn_norm = LayerNorm(params_, p + ".ffn_norm", c.dim);
    layer.ffn = FeedForward(params_, p + ".ffn", c.dim, c.ffn_dim, rng);
    decoder_.push_back(std::move(layer));
  }
  decoder_norm_ = LayerNorm(params_, "decoder.final_norm", c.dim);
  generator_ = Linear(params_, "generator", c.dim, c.vocab_size, rng);
  if (c.has_copy()) {
    copy_attention_ = MultiHeadAttention(params_, "copy.attention", c.dim, c.copy_heads, rng);
    copy_gate_ = Linear(params_, "copy.gate", 2 * c.dim, 1, rng);
  }
}

Tensor DeliberationModel::fuse(const Tensor& text, const Tensor& audio) const {
  if (!config_.has_fusion()) {
    throw Error(ErrorCode::kShapeMismatch, "fuse() on a model without a fusion module");
  }
  if (text.cols() != config_.asr_dim || audio.cols() != config_.asr_dim) {
    throw Error(ErrorCode::kShapeMismatch, "text " + text.shape_string() + " / audio " +
                                               audio.shape_string() + " vs width " +
                                               std::to_string(config_.asr_dim));
  }
  const Tensor attended = fusion_attention_(text, audio, audio).output;
  return fusion_projection_(ops::concat_feature(text, attended));
}

Tensor DeliberationModel::pool(const Tensor& embeddings) const {
  Tensor x = ops::add(embeddings, positional_encoding(embeddings.rows(), embeddings.cols()));
  for (const EncoderLayer& layer : pooling_) {
    const Tensor normed = layer.attention_norm(x);
    x = ops::add(x, layer.attention(normed, normed, normed).output);
    x = ops::add(x, layer.ffn(layer.ffn_norm(x)));
  }
  return x;
}

Tensor DeliberationModel::encode(const ModelInputs& inputs) const {
  Tensor source;
  switch (config_.modality) {
    case Modality::kFusion: source = fuse(inputs.text, inputs.audio); break;
    case Modality::kTextOnly: source = inputs.text; break;
    case Modality::kAudioOnly: source = inputs.audio; break;
  }
  if (!source.defined() || source.rows() == 0) {
    throw Error(ErrorCode::kShapeMismatch, std::string("missing ") +
                                               std::string(to_string(config_.modality)) +
                                               " input");
  }
  if (source.cols() != config_.asr_dim) {
    throw Error(ErrorCode::kShapeMismatch, "input " + source.shape_string() + " vs width " +
                                               std::to_string(config_.asr_dim));
  }
  if (config_.needs_projection()) source = input_projection_(source);
  return pool(source);
}

Tensor DeliberationModel::decoder_states(const Tensor& encoded, std::span<const int> prefix) const {
  Tensor x = ops::add(ops::embedding_lookup(target_embedding_, prefix),
                      positional_encoding(prefix.size(), config_.dim));
  for (const DecoderLayer& layer : decoder_) {
    const Tensor s = layer.self_norm(x);
    x = ops::add(x, layer.self_attention(s, s, s, /*causal=*/true).output);
    const Tensor q = layer.cross_norm(x);
    x = ops::add(x, layer.cross_attention(q, encoded, encoded).output);
    x = ops::add(x, layer.ffn(layer.ffn_norm(x)));
  }
  return decoder_norm_(x);
}

OutputDistribution DeliberationModel::output_distribution(const Tensor& states,
                                                          const Tensor& encoded,
                                                          std::span<const int> hypothesis,
                                                          std::optional<double> forced_p_copy) const {
  OutputDistribution out;
  out.g = ops::softmax(generator_(states));
  const size_t steps = states.rows();
  const size_t vocab = config_.vocab_size;
  if (!config_.has_copy()) {
    out.c = Tensor(steps, vocab);
    out.p_copy = Tensor(steps, 1);
    out.o = out.g;
    return out;
  }
  if (hypothesis.size() != encoded.rows()) {
    throw Error(ErrorCode::kLengthMismatch, "hypothesis of " + std::to_string(hypothesis.size()) +
                                                " tokens for encoder outputs " +
                                                encoded.shape_string());
  }
  MhaResult attn = copy_attention_(states, encoded, encoded);
  out.gamma = attn.output;
  if (attn.weights.size() == 1) {
    out.omega = attn.weights[0];
  } else {
    Tensor total = attn.weights[0];
    for (size_t h = 1; h < attn.weights.size(); ++h) total = ops::add(total, attn.weights[h]);
    out.omega = ops::scale(total, 1.0 / static_cast<double>(attn.weights.size()));
  }
  out.c = ops::scatter_cols(out.omega, hypothesis, vocab);
  if (forced_p_copy.has_value()) {
    out.p_copy = Tensor(steps, 1, *forced_p_copy);
  } else {
    out.p_copy = ops::sigmoid(copy_gate_(ops::concat_feature(states, out.gamma)));
  }
  out.o = ops::mix(out.g, out.c, out.p_copy);
  return out;
}

DecoderStepOutput DeliberationModel::decode_step(const Tensor& state, const Tensor& encoded,
                                                 std::span<const int> hypothesis,
                                                 std::optional<double> forced_p_copy) const {
  if (state.rows() != 1) {
    throw Error(ErrorCode::kShapeMismatch, "decoder state must be 1 x D, got " + state.shape_string());
  }
  const OutputDistribution dist = output_distribution(state, encoded, hypothesis, forced_p_copy);
  DecoderStepOutput step;
  step.g = row_values(dist.g, 0);
  step.c = row_values(dist.c, 0);
  if (dist.omega.defined()) step.omega = row_values(dist.omega, 0);
  if (dist.gamma.defined()) step.gamma = row_values(dist.gamma, 0);
  step.p_copy = dist.p_copy(0, 0);
  step.o = row_values(dist.o, 0);
  return step;
}

Tensor DeliberationModel::sequence_loss(const ModelInputs& inputs, std::span<const int> target,
                                        double label_smoothing) const {
  if (target.size() < 2) {
    throw Error(ErrorCode::kLengthMismatch, "target needs <s> and </s>");
  }
  const Tensor encoded = encode(inputs);
  const Tensor states = decoder_states(encoded, target.first(target.size() - 1));
  Tensor logp;
  if (config_.has_copy()) {
    const OutputDistribution dist = output_distribution(states, encoded, inputs.hypothesis);
    logp = ops::log_clamped(dist.o, kLogFloor);
  } else {
    logp = ops::log_softmax(generator_(states));
  }
  return ops::label_smoothed_nll(logp, target.subspan(1), label_smoothing);
}

Tensor DeliberationModel::extend_decoder(DecoderCache& cache, const Tensor& encoded,
                                         int token) const {
  const int ids[1] = {token};
  const Tensor pe = positional_encoding(cache.length + 1, config_.dim);
  Tensor x = ops::add(ops::embedding_lookup(target_embedding_, ids),
                      ops::slice_rows(pe, cache.length, 1));
  cache.layer_inputs.resize(decoder_.size());
  for (size_t l = 0; l < decoder_.size(); ++l) {
    const DecoderLayer& layer = decoder_[l];
    const Tensor s = layer.self_norm(x);
    Tensor& history = cache.layer_inputs[l];
    if (history.defined()) {
      const Tensor parts[2] = {history, s};
      history = ops::concat_rows(parts);
    } else {
      history = s;
    }
    // The newest position may attend to every cached one.
    x = ops::add(x, layer.self_attention(s, history, history).output);
    const Tensor q = layer.cross_norm(x);
    x = ops::add(x, layer.cross_attention(q, encoded, encoded).output);
    x = ops::add(x, layer.ffn(layer.ffn_norm(x)));
  }
  ++cache.length;
  return decoder_norm_(x);
}

std::vector<int> DeliberationModel::greedy_decode(const ModelInputs& inputs) const {
  NoGradScope no_grad;
  const Tensor encoded = encode(inputs);
  DecoderCache cache;
  std::vector<int> out;
  int token = Vocabulary::kBos;
  while (out.size() < config_.max_decode_length) {
    const Tensor state = extend_decoder(cache, encoded, token);
    const OutputDistribution dist = output_distribution(state, encoded, inputs.hypothesis);
    auto o = dist.o.values();
    token = static_cast<int>(std::max_element(o.begin(), o.end()) - o.begin());
    if (token == Vocabulary::kEos) break;
    out.push_back(token);
  }
  return out;
}

}  // namespace delib
