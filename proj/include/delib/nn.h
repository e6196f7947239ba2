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

#ifndef DELIB_NN_H_
#define DELIB_NN_H_

#include <string>
#include <vector>

#include "delib/random.h"
#include "delib/tensor.h"

namespace delib {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Ordered, named collection of parameters. A trainable set marks every
// tensor it registers as requiring gradients; a frozen set never does.
class ParameterSet {
 public:
  explicit ParameterSet(bool trainable = true) : trainable_(trainable) {}

  Tensor add(std::string name, Tensor t);

  bool trainable() const { return trainable_; }
  const std::vector<NamedTensor>& entries() const { return entries_; }
  std::vector<Tensor> tensors() const;
  const Tensor* find(const std::string& name) const;
  size_t scalar_count() const;
  void zero_grad();

  // Raw little-endian dump of every value, in registration order.
  std::string value_bytes() const;

 private:
  bool trainable_;
  std::vector<NamedTensor> entries_;
};

Tensor xavier_uniform(size_t rows, size_t cols, Rng& rng);
Tensor normal_init(size_t rows, size_t cols, double stddev, Rng& rng);

// Sinusoidal position encodings, length x dim.
Tensor positional_encoding(size_t length, size_t dim);

struct Linear {
  Tensor weight;  // in x out
  Tensor bias;    // 1 x out; undefined for a bias-free layer

  Linear() = default;
  Linear(ParameterSet& params, const std::string& name, size_t in, size_t out, Rng& rng,
         bool with_bias = true);
  Tensor operator()(const Tensor& x) const {
    return bias.defined() ? ops::linear(x, weight, bias) : ops::matmul(x, weight);
  }
  size_t in() const { return weight.rows(); }
  size_t out() const { return weight.cols(); }
};

struct LayerNorm {
  Tensor gain;
  Tensor bias;

  LayerNorm() = default;
  LayerNorm(ParameterSet& params, const std::string& name, size_t dim);
  Tensor operator()(const Tensor& x) const { return ops::layer_norm(x, gain, bias); }
};

struct MhaParams {
  Linear query;
  Linear key;
  Linear value;
  Linear output;
};

struct MhaResult {
  Tensor output;                // T_q x D
  std::vector<Tensor> weights;  // one post-softmax T_q x T_k matrix per head
};

// Scaled dot-product attention with learned projections, split into `heads`
// heads of width D / heads. The key projection has no bias: a key bias adds
// the same score to every key of a query and cancels in the softmax. Throws kHeadsDontDivide or kShapeMismatch.
MhaResult mha(const Tensor& query, const Tensor& key, const Tensor& value, size_t heads,
              const MhaParams& params, bool causal = false);

class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParameterSet& params, const std::string& name, size_t dim, size_t heads,
                     Rng& rng);

  MhaResult operator()(const Tensor& query, const Tensor& key, const Tensor& value,
                       bool causal = false) const {
    return mha(query, key, value, heads_, params_, causal);
  }
  const MhaParams& params() const { return params_; }
  size_t heads() const { return heads_; }

 private:
  MhaParams params_;
  size_t heads_ = 1;
};

struct FeedForward {
  Linear hidden;
  Linear output;

  FeedForward() = default;
  FeedForward(ParameterSet& params, const std::string& name, size_t dim, size_t inner, Rng& rng);
  Tensor operator()(const Tensor& x) const { return output(ops::gelu(hidden(x))); }
};

}  // namespace delib

#endif  // DELIB_NN_H_
