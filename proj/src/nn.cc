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

#include "delib/nn.h"

#include <cmath>
#include <cstring>

#include "delib/error.h"

namespace delib {

Tensor ParameterSet::add(std::string name, Tensor t) {
  t.set_requires_grad(trainable_);
  entries_.push_back({std::move(name), t});
  return t;
}

std::vector<Tensor> ParameterSet::tensors() const {
  std::vector<Tensor> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.tensor);
  return out;
}

const Tensor* ParameterSet::find(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return &e.tensor;
  }
  return nullptr;
}

size_t ParameterSet::scalar_count() const {
  size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

std::string ParameterSet::value_bytes() const {
  std::string out;
  for (const auto& e : entries_) {
    auto v = e.tensor.values();
    const size_t offset = out.size();
    out.resize(offset + v.size() * sizeof(double));
    std::memcpy(out.data() + offset, v.data(), v.size() * sizeof(double));
  }
  return out;
}

Tensor xavier_uniform(size_t rows, size_t cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor t(rows, cols);
  for (double& v : t.mutable_values()) v = rng.uniform(-bound, bound);
  return t;
}

Tensor normal_init(size_t rows, size_t cols, double stddev, Rng& rng) {
  Tensor t(rows, cols);
  for (double& v : t.mutable_values()) v = stddev * rng.normal();
  return t;
}

Tensor positional_encoding(size_t length, size_t dim) {
  Tensor pe(length, dim);
  for (size_t pos = 0; pos < length; ++pos) {
    for (size_t i = 0; i < dim; ++i) {
      const double rate =
          std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(dim));
      const double angle = static_cast<double>(pos) * rate;
      pe.at(pos, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

Linear::Linear(ParameterSet& params, const std::string& name, size_t in, size_t out, Rng& rng,
               bool with_bias)
    : weight(params.add(name + ".weight", xavier_uniform(in, out, rng))) {
  if (with_bias) bias = params.add(name + ".bias", Tensor(1, out));
}

LayerNorm::LayerNorm(ParameterSet& params, const std::string& name, size_t dim)
    : gain(params.add(name + ".gain", Tensor(1, dim, 1.0))),
      bias(params.add(name + ".bias", Tensor(1, dim))) {}

MhaResult mha(const Tensor& query, const Tensor& key, const Tensor& value, size_t heads,
              const MhaParams& params, bool causal) {
  const size_t dim = params.query.out();
  if (heads == 0 || dim % heads != 0) {
    throw Error(ErrorCode::kHeadsDontDivide,
                std::to_string(heads) + " heads for dimension " + std::to_string(dim));
  }
  if (key.rows() != value.rows()) {
    throw Error(ErrorCode::kShapeMismatch,
                "key " + key.shape_string() + " vs value " + value.shape_string());
  }
  if (query.cols() != params.query.in()) {
    throw Error(ErrorCode::kShapeMismatch, "query " + query.shape_string() + " vs projection " +
                                               params.query.weight.shape_string());
  }
  if (key.cols() != params.key.in() || value.cols() != params.value.in()) {
    throw Error(ErrorCode::kShapeMismatch, "key/value " + key.shape_string() + " vs projection " +
                                               params.key.weight.shape_string());
  }
  const Tensor q = params.query(query);
  const Tensor k = params.key(key);
  const Tensor v = params.value(value);
  const size_t width = dim / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(width));

  MhaResult result;
  std::vector<Tensor> contexts;
  contexts.reserve(heads);
  for (size_t h = 0; h < heads; ++h) {
    const Tensor qh = heads == 1 ? q : ops::slice_cols(q, h * width, width);
    const Tensor kh = heads == 1 ? k : ops::slice_cols(k, h * width, width);
    const Tensor vh = heads == 1 ? v : ops::slice_cols(v, h * width, width);
    Tensor w = ops::softmax(ops::scale(ops::matmul_nt(qh, kh), inv_sqrt), causal);
    contexts.push_back(ops::matmul(w, vh));
    result.weights.push_back(std::move(w));
  }
  const Tensor merged = heads == 1 ? contexts[0] : ops::concat_feature(contexts);
  result.output = params.output(merged);
  return result;
}

MultiHeadAttention::MultiHeadAttention(ParameterSet& params, const std::string& name, size_t dim,
                                       size_t heads, Rng& rng)
    : heads_(heads) {
  if (heads == 0 || dim % heads != 0) {
    throw Error(ErrorCode::kHeadsDontDivide,
                std::to_string(heads) + " heads for dimension " + std::to_string(dim));
  }
  params_.query = Linear(params, name + ".query", dim, dim, rng);
  params_.key = Linear(params, name + ".key", dim, dim, rng, false);
  params_.value = Linear(params, name + ".value", dim, dim, rng);
  params_.output = Linear(params, name + ".output", dim, dim, rng);
}

FeedForward::FeedForward(ParameterSet& params, const std::string& name, size_t dim, size_t inner,
                         Rng& rng)
    : hidden(params, name + ".hidden", dim, inner, rng),
      output(params, name + ".output", inner, dim, rng) {}

}  // namespace delib
