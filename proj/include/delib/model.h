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

// Second-pass parser over frozen first-pass embeddings.
//
//   text  (T x S) --+
//                   +-- fuse --> [project] --> pool --> e (T x D)
//   audio (A x S) --+
//
//   decoder(prefix, e) --> d_t --> g_t = softmax(W d_t)
//                              \-> (gamma_t, omega_t) = attn(d_t, e, e)
//                                  c_t = scatter(h, omega_t)
//                                  p_t = sigmoid(W' [d_t, gamma_t])
//                                  o_t = (1 - p_t) g_t + p_t c_t
//
// The text-only variant feeds the text embeddings straight to the pooling
// stack; the audio-only variant feeds the audio embeddings and has neither
// fusion nor copy head (o_t = g_t).

#ifndef DELIB_MODEL_H_
#define DELIB_MODEL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "delib/nn.h"
#include "delib/tensor.h"

namespace delib {

enum class Modality { kFusion, kTextOnly, kAudioOnly };

std::string_view to_string(Modality m);
// Accepts "fusion", "text", "text-only", "audio", "audio-only".
Modality parse_modality(std::string_view s);

struct ModelConfig {
  size_t asr_dim = 32;  // width of the frozen encoder outputs
  size_t dim = 32;      // pooling and decoder width
  size_t fusion_heads = 4;
  size_t pooling_layers = 2;
  size_t pooling_heads = 4;
  size_t ffn_dim = 64;
  size_t decoder_layers = 1;
  size_t decoder_heads = 2;
  size_t copy_heads = 1;
  Modality modality = Modality::kFusion;
  size_t vocab_size = 0;  // decoder output units, specials included
  size_t max_decode_length = 64;

  // "toy" (D = 16), "desk" (D = 32) or "paper-scale" (256-wide encoders,
  // pooling width 224 / 240 / 256 for fusion / text / audio).
  static ModelConfig preset(std::string_view name, Modality modality, size_t vocab_size);

  bool has_fusion() const { return modality == Modality::kFusion; }
  bool has_copy() const { return modality != Modality::kAudioOnly; }
  bool needs_projection() const { return asr_dim != dim; }
  // Throws kHeadsDontDivide / kShapeMismatch.
  void validate() const;
};

// Exact number of trainable scalars of a model built from `config`.
size_t param_count(const ModelConfig& config);

struct ModelInputs {
  Tensor text;                  // T x asr_dim; unused by the audio-only variant
  Tensor audio;                 // A x asr_dim; unused by the text-only variant
  std::vector<int> hypothesis;  // first-pass token ids, one per text row
};

// Distributions for a block of decoder steps (one row per step).
struct OutputDistribution {
  Tensor g;       // L x V generation distribution
  Tensor c;       // L x V copy distribution
  Tensor omega;   // L x T copy attention
  Tensor gamma;   // L x D copy context
  Tensor p_copy;  // L x 1
  Tensor o;       // L x V final distribution
};

struct DecoderStepOutput {
  std::vector<double> g;
  std::vector<double> c;
  std::vector<double> omega;
  std::vector<double> gamma;
  double p_copy = 0.0;
  std::vector<double> o;
};

struct EncoderLayer {
  LayerNorm attention_norm;
  MultiHeadAttention attention;
  LayerNorm ffn_norm;
  FeedForward ffn;
};

struct DecoderLayer {
  LayerNorm self_norm;
  MultiHeadAttention self_attention;
  LayerNorm cross_norm;
  MultiHeadAttention cross_attention;
  LayerNorm ffn_norm;
  FeedForward ffn;
};

// Normalized inputs of every decoder layer for the positions decoded so
// far; lets greedy decoding append one position at a time.
struct DecoderCache {
  std::vector<Tensor> layer_inputs;
  size_t length = 0;
};

class DeliberationModel {
 public:
  DeliberationModel(const ModelConfig& config, uint64_t seed);

  DeliberationModel(const DeliberationModel&) = delete;
  DeliberationModel& operator=(const DeliberationModel&) = delete;

  const ModelConfig& config() const { return config_; }
  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }
  size_t param_count() const { return params_.scalar_count(); }

  // attn = MHA(text, audio, audio); fused = Linear([text, attn]).
  Tensor fuse(const Tensor& text, const Tensor& audio) const;
  // Sinusoidal positions are added, then the pre-norm encoder layers run.
  Tensor pool(const Tensor& embeddings) const;
  // Modality-specific input selection, optional projection, pooling.
  Tensor encode(const ModelInputs& inputs) const;
  // Decoder output states for every position of `prefix` (L x D).
  Tensor decoder_states(const Tensor& encoded, std::span<const int> prefix) const;
  // Output distributions for a block of states. `forced_p_copy` overrides
  // the learned gate. Throws kLengthMismatch when |hypothesis| != rows(e).
  OutputDistribution output_distribution(const Tensor& states, const Tensor& encoded,
                                         std::span<const int> hypothesis,
                                         std::optional<double> forced_p_copy = {}) const;
  // Appends `token` at the next position and returns its decoder state
  // (1 x D); equal to the last row of decoder_states() over the same prefix.
  Tensor extend_decoder(DecoderCache& cache, const Tensor& encoded, int token) const;
  // Single step: `state` is 1 x D.
  DecoderStepOutput decode_step(const Tensor& state, const Tensor& encoded,
                                std::span<const int> hypothesis,
                                std::optional<double> forced_p_copy = {}) const;

  // Summed label-smoothed cross entropy of `target` (<s> ... </s>) under
  // teacher forcing; the number of scored steps is |target| - 1.
  Tensor sequence_loss(const ModelInputs& inputs, std::span<const int> target,
                       double label_smoothing) const;

  // Argmax decoding from <s> until </s> or max_decode_length; the returned
  // ids exclude <s> and </s>.
  std::vector<int> greedy_decode(const ModelInputs& inputs) const;

  // Sub-modules, exposed for oracle tests.
  const MultiHeadAttention& fusion_attention() const { return fusion_attention_; }
  const Linear& fusion_projection() const { return fusion_projection_; }
  const std::vector<EncoderLayer>& pooling_layers() const { return pooling_; }
  const std::vector<DecoderLayer>& decoder_layers() const { return decoder_; }
  const Tensor& target_embedding() const { return target_embedding_; }
  const LayerNorm& decoder_norm() const { return decoder_norm_; }
  const Linear& generator() const { return generator_; }
  const MultiHeadAttention& copy_attention() const { return copy_attention_; }
  const Linear& copy_gate() const { return copy_gate_; }

 private:
  ModelConfig config_;
  ParameterSet params_;
  Linear input_projection_;
  MultiHeadAttention fusion_attention_;
  Linear fusion_projection_;
  std::vector<EncoderLayer> pooling_;
  Tensor target_embedding_;
  std::vector<DecoderLayer> decoder_;
  LayerNorm decoder_norm_;
  Linear generator_;
  MultiHeadAttention copy_attention_;
  Linear copy_gate_;
};

}  // namespace delib

#endif  // DELIB_MODEL_H_
