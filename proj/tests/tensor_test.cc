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

#include "delib/tensor.h"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "delib/checkpoint.h"
#include "delib/error.h"
#include "delib/nn.h"
#include "oracle.h"

namespace delib {
namespace {

Tensor random(size_t r, size_t c, Rng& rng, double scale = 1.0) {
  return normal_init(r, c, scale, rng).set_requires_grad(true);
}

// Reduces an op output to a scalar through a fixed random projection so
// every output entry gets a distinct upstream gradient.
std::function<Tensor()> probe(std::function<Tensor()> op, uint64_t seed) {
  Rng rng(seed);
  Tensor shape = [&] {
    NoGradScope no_grad;
    return op();
  }();
  const Tensor weights = normal_init(shape.rows(), shape.cols(), 1.0, rng);
  return [op, weights] { return ops::sum(ops::mul(op(), weights)); };
}

void expect_gradcheck(const char* name, std::function<Tensor()> op, std::vector<Tensor> params) {
  const double err = gradcheck(probe(op, 99), params, 1e-5);
  EXPECT_LT(err, 1e-3) << name;
}

TEST(Ops, Examples) {
  const Tensor s = ops::softmax(Tensor::row({0.0, 0.0}));
  EXPECT_DOUBLE_EQ(s(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(s(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(ops::sigmoid(Tensor::scalar(0.0)).item(), 0.5);
  const Tensor c = ops::concat_feature(Tensor(3, 4, 1.0), Tensor(3, 4, 2.0));
  EXPECT_EQ(c.shape(), (std::array<size_t, 2>{3, 8}));
  EXPECT_EQ(c(2, 3), 1.0);
  EXPECT_EQ(c(2, 4), 2.0);
}

TEST(Ops, ShapeMismatchNamesBothShapes) {
  try {
    ops::matmul(Tensor(2, 3), Tensor(4, 5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
    EXPECT_NE(std::string(e.what()).find("2x3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("4x5"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ops::add(Tensor(2, 3), Tensor(3, 2)), Error);
  EXPECT_THROW(ops::concat_feature(Tensor(2, 3), Tensor(3, 3)), Error);
}

TEST(Ops, SoftmaxRowsAreDistributions) {
  Rng rng(3);
  const Tensor x = normal_init(6, 9, 30.0, rng);
  for (bool causal : {false, true}) {
    const Tensor p = ops::softmax(x, causal);
    for (size_t i = 0; i < p.rows(); ++i) {
      double total = 0.0;
      for (size_t j = 0; j < p.cols(); ++j) {
        EXPECT_GE(p(i, j), 0.0);
        if (causal && j > i) {
          EXPECT_EQ(p(i, j), 0.0);
        }
        total += p(i, j);
      }
      EXPECT_NEAR(total, 1.0, 1e-6);
    }
  }
}

TEST(CrossEntropy, UniformLogitsGiveLogV) {
  for (size_t v : {2u, 5u, 17u}) {
    for (double eps : {0.0, 0.1, 0.5}) {
      EXPECT_NEAR(cross_entropy_label_smoothed(Tensor(1, v, 0.3), 1, eps).item(),
                  std::log(static_cast<double>(v)), 1e-12);
    }
  }
}

TEST(CrossEntropy, NoSmoothingIsStandardCrossEntropy) {
  const Tensor logits = Tensor::row({9.0, -1.0, 0.5});
  const double z = std::exp(9.0) + std::exp(-1.0) + std::exp(0.5);
  EXPECT_NEAR(cross_entropy_label_smoothed(logits, 0, 0.0).item(), -std::log(std::exp(9.0) / z),
              1e-12);
}

TEST(CrossEntropy, HandComputedValue) {
  // p = softmax([2,0,0,0]); q = [0.9, 0.1/3, 0.1/3, 0.1/3]; -sum q log p.
  EXPECT_NEAR(cross_entropy_label_smoothed(Tensor::row({2, 0, 0, 0}), 0, 0.1).item(),
              0.5407529539131313, 1e-12);
  EXPECT_THROW(cross_entropy_label_smoothed(Tensor::row({2, 0, 0, 0}), 4, 0.1), Error);
}

TEST(Gradcheck, SumOfSquares) {
  Rng rng(1);
  Tensor x = random(3, 4, rng);
  std::vector<Tensor> params{x};
  EXPECT_LT(gradcheck([&] { return ops::sum(ops::mul(x, x)); }, params, 1e-5), 1e-8);
}

TEST(Gradcheck, EveryDifferentiableOp) {
  Rng rng(7);
  Tensor a = random(3, 4, rng), b = random(3, 4, rng), w = random(4, 5, rng);
  Tensor bias = random(1, 5, rng), row = random(1, 4, rng), col = random(3, 1, rng);
  Tensor pos = normal_init(3, 4, 1.0, rng);
  for (double& v : pos.mutable_values()) v = std::abs(v) + 0.1;
  pos.set_requires_grad(true);
  Tensor prob = ops::softmax(normal_init(3, 4, 1.0, rng)).detach().set_requires_grad(true);
  Tensor p = ops::sigmoid(normal_init(3, 1, 1.0, rng)).detach().set_requires_grad(true);
  Tensor gain = random(1, 4, rng), table = random(6, 4, rng);
  const Tensor mask = ops::dropout_mask(3, 4, 0.3, 5);
  const std::vector<int> ids{2, 0, 5};
  const std::vector<int> scatter_ids{1, 4, 1, 0};
  const std::vector<int> targets{3, -1, 0};

  expect_gradcheck("matmul", [&] { return ops::matmul(a, w); }, {a, w});
  expect_gradcheck("matmul_nt", [&] { return ops::matmul_nt(a, b); }, {a, b});
  expect_gradcheck("add", [&] { return ops::add(a, b); }, {a, b});
  expect_gradcheck("sub", [&] { return ops::sub(a, b); }, {a, b});
  expect_gradcheck("mul", [&] { return ops::mul(a, b); }, {a, b});
  expect_gradcheck("add_row", [&] { return ops::add_row(a, row); }, {a, row});
  expect_gradcheck("scale", [&] { return ops::scale(a, -1.7); }, {a});
  expect_gradcheck("mul_col", [&] { return ops::mul_col(a, col); }, {a, col});
  expect_gradcheck("linear", [&] { return ops::linear(a, w, bias); }, {a, w, bias});
  expect_gradcheck("concat_feature", [&] { return ops::concat_feature(a, b); }, {a, b});
  expect_gradcheck("concat_rows", [&] {
    const Tensor parts[2] = {a, b};
    return ops::concat_rows(parts);
  }, {a, b});
  expect_gradcheck("slice_cols", [&] { return ops::slice_cols(a, 1, 2); }, {a});
  expect_gradcheck("slice_rows", [&] { return ops::slice_rows(a, 1, 2); }, {a});
  expect_gradcheck("relu", [&] { return ops::relu(a); }, {a});
  expect_gradcheck("gelu", [&] { return ops::gelu(a); }, {a});
  expect_gradcheck("tanh", [&] { return ops::tanh(a); }, {a});
  expect_gradcheck("sigmoid", [&] { return ops::sigmoid(a); }, {a});
  expect_gradcheck("softmax", [&] { return ops::softmax(a); }, {a});
  expect_gradcheck("causal softmax", [&] { return ops::softmax(a, true); }, {a});
  expect_gradcheck("log_softmax", [&] { return ops::log_softmax(a); }, {a});
  expect_gradcheck("log_clamped", [&] { return ops::log_clamped(pos, 1e-12); }, {pos});
  expect_gradcheck("layer_norm", [&] { return ops::layer_norm(a, gain, row); }, {a, gain, row});
  expect_gradcheck("embedding_lookup", [&] { return ops::embedding_lookup(table, ids); }, {table});
  expect_gradcheck("apply_mask", [&] { return ops::apply_mask(a, mask); }, {a});
  expect_gradcheck("scatter_cols", [&] { return ops::scatter_cols(prob, scatter_ids, 6); }, {prob});
  expect_gradcheck("mix", [&] { return ops::mix(prob, ops::softmax(b), p); }, {prob, b, p});
  expect_gradcheck("label_smoothed_nll",
                   [&] { return ops::label_smoothed_nll(ops::log_softmax(a), targets, 0.1); }, {a});
  expect_gradcheck("cross_entropy",
                   [&] { return cross_entropy_label_smoothed(row, 2, 0.1); }, {row});
}

TEST(Tape, FanOutAccumulates) {
  Tensor x = Tensor::row({1.5, -2.0}).set_requires_grad(true);
  Tape tape;
  {
    TapeScope scope(tape);
    // y = sum(x * x + 3x): dy/dx = 2x + 3.
    const Tensor y = ops::sum(ops::add(ops::mul(x, x), ops::scale(x, 3.0)));
    tape.backward(y);
  }
  EXPECT_DOUBLE_EQ(x.grad()[0], 6.0);
  EXPECT_DOUBLE_EQ(x.grad()[1], -1.0);
}

TEST(Tape, NoGradScopeRecordsNothing) {
  Tensor x = Tensor::row({1.0, 2.0}).set_requires_grad(true);
  Tape tape;
  TapeScope scope(tape);
  {
    NoGradScope no_grad;
    ops::sum(ops::mul(x, x));
  }
  EXPECT_EQ(tape.size(), 0u);
  ops::sum(ops::mul(x, x));
  EXPECT_GT(tape.size(), 0u);
}

TEST(Parameters, FrozenSetsNeverCollectGradients) {
  Rng rng(2);
  ParameterSet frozen(false);
  Linear layer(frozen, "frozen", 4, 3, rng);
  ParameterSet trainable;
  Linear head(trainable, "head", 3, 2, rng);
  Tensor x = normal_init(2, 4, 1.0, rng);
  Tape tape;
  {
    TapeScope scope(tape);
    tape.backward(ops::sum(head(layer(x))));
  }
  for (const Tensor& t : frozen.tensors()) {
    EXPECT_FALSE(t.requires_grad());
    EXPECT_FALSE(t.has_grad());
  }
  for (const Tensor& t : trainable.tensors()) EXPECT_TRUE(t.has_grad());
}

TEST(Mha, SingleKeyGetsAllWeight) {
  Rng rng(4);
  ParameterSet params;
  MultiHeadAttention attn(params, "attn", 8, 2, rng);
  const Tensor q = normal_init(3, 8, 1.0, rng);
  const Tensor kv = normal_init(1, 8, 1.0, rng);
  const MhaResult r = attn(q, kv, kv);
  const oracle::Mat v = oracle::linear(oracle::linear(oracle::to_mat(kv), attn.params().value),
                                       attn.params().output);
  for (const Tensor& w : r.weights) {
    for (size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(w(i, 0), 1.0);
  }
  for (size_t i = 0; i < 3; ++i) {
    for (size_t j = 0; j < 8; ++j) EXPECT_NEAR(r.output(i, j), v(0, j), 1e-12);
  }
}

TEST(Mha, MatchesDenseOracle) {
  for (size_t heads : {1u, 2u, 4u}) {
    Rng rng(10 + heads);
    ParameterSet params;
    MultiHeadAttention attn(params, "attn", 4, heads, rng);
    const Tensor q = normal_init(3, 4, 1.0, rng);
    const Tensor kv = normal_init(5, 4, 1.0, rng);
    const MhaResult r = attn(q, kv, kv);
    const oracle::Attention o =
        oracle::mha(oracle::to_mat(q), oracle::to_mat(kv), oracle::to_mat(kv), attn);
    EXPECT_LT(oracle::max_abs_diff(oracle::to_mat(r.output), o.output), 1e-10);
    ASSERT_EQ(r.weights.size(), heads);
    for (size_t h = 0; h < heads; ++h) {
      EXPECT_LT(oracle::max_abs_diff(oracle::to_mat(r.weights[h]), o.weights[h]), 1e-10);
      for (size_t i = 0; i < 3; ++i) {
        double total = 0.0;
        for (size_t j = 0; j < 5; ++j) total += r.weights[h](i, j);
        EXPECT_NEAR(total, 1.0, 1e-12);
      }
    }
  }
}

TEST(Mha, HeadsMustDivideWidth) {
  Rng rng(1);
  ParameterSet params;
  try {
    MultiHeadAttention attn(params, "attn", 6, 4, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kHeadsDontDivide);
  }
}

TEST(Checkpoint, RoundTripAtFloatPrecision) {
  Rng rng(8);
  ParameterSet params;
  Linear a(params, "a", 3, 4, rng);
  LayerNorm n(params, "n", 4);
  const std::string bytes = encode_checkpoint(params, 1234);
  const Checkpoint ckpt = decode_checkpoint(bytes);
  EXPECT_EQ(ckpt.vocab_digest, 1234u);
  EXPECT_EQ(ckpt.version, kCheckpointVersion);
  ASSERT_EQ(ckpt.tensors.size(), params.entries().size());

  ParameterSet copy;
  Rng other(9);
  Linear b(copy, "a", 3, 4, other);
  LayerNorm m(copy, "n", 4);
  restore_parameters(ckpt, copy);
  for (size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(b.weight.values()[i], static_cast<double>(static_cast<float>(a.weight.values()[i])));
  }
  EXPECT_EQ(encode_checkpoint(copy, 1234), bytes);

  EXPECT_THROW(decode_checkpoint("XXXX" + bytes.substr(4)), Error);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 1)), Error);
  ParameterSet wrong;
  Linear c(wrong, "a", 4, 4, other);
  EXPECT_THROW(restore_parameters(ckpt, wrong), Error);
}

}  // namespace
}  // namespace delib
