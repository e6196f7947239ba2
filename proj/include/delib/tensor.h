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

// Dense row-major matrices with reverse-mode differentiation.
//
// Every value is a rows x cols matrix of doubles (vectors are 1 x n, scalars
// 1 x 1). Ops execute eagerly. While a Tape is active on the current thread
// (see TapeScope), each op whose inputs require gradients appends a backward
// closure to it; Tape::backward() replays those closures in reverse creation
// order, which is a reverse topological order of the graph.

#ifndef DELIB_TENSOR_H_
#define DELIB_TENSOR_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace delib {

struct TensorNode {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> value;
  // Empty until a gradient flows in.
  std::vector<double> grad;
  bool requires_grad = false;

  std::vector<double>& grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

class Tensor {
 public:
  Tensor() = default;
  Tensor(size_t rows, size_t cols, double fill = 0.0);
  Tensor(size_t rows, size_t cols, std::vector<double> values);

  static Tensor row(std::vector<double> values);
  static Tensor scalar(double v) { return Tensor(1, 1, v); }

  bool defined() const { return node_ != nullptr; }
  size_t rows() const { return node_->rows; }
  size_t cols() const { return node_->cols; }
  size_t size() const { return node_->value.size(); }
  std::array<size_t, 2> shape() const { return {rows(), cols()}; }
  std::string shape_string() const;

  std::span<const double> values() const { return node_->value; }
  std::span<double> mutable_values() { return node_->value; }
  double operator()(size_t r, size_t c) const { return node_->value[r * cols() + c]; }
  double& at(size_t r, size_t c) { return node_->value[r * cols() + c]; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool on) {
    node_->requires_grad = on;
    return *this;
  }
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const double> grad() const { return node_->grad; }
  double grad_at(size_t r, size_t c) const {
    return has_grad() ? node_->grad[r * cols() + c] : 0.0;
  }
  void zero_grad() { node_->grad.clear(); }

  // Fresh leaf with a copy of the values.
  Tensor detach() const;
  Tensor row_at(size_t r) const;

  TensorNode* node() const { return node_.get(); }
  const std::shared_ptr<TensorNode>& shared_node() const { return node_; }
  bool same_node(const Tensor& other) const { return node_ == other.node_; }

 private:
  std::shared_ptr<TensorNode> node_;
};

class Tape {
 public:
  void record(std::function<void()> backward) { steps_.push_back(std::move(backward)); }
  // Seeds d(loss)/d(loss) = 1 and runs every recorded closure once, newest
  // first. `loss` must be 1 x 1.
  void backward(const Tensor& loss);
  size_t size() const { return steps_.size(); }
  void clear() { steps_.clear(); }

  // Innermost active tape on this thread, or nullptr.
  static Tape* active();

 private:
  std::vector<std::function<void()>> steps_;
};

// Makes `tape` the active tape of the current thread for its lifetime.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

// Suspends recording (e.g. for inference or finite differences).
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Tape* previous_;
};

namespace ops {

// Shape errors are reported as Error(kShapeMismatch) naming both shapes.
Tensor matmul(const Tensor& a, const Tensor& b);     // (m x k)(k x n)
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // a b^T
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);        // elementwise
Tensor add_row(const Tensor& a, const Tensor& bias);  // bias 1 x n broadcast over rows
Tensor scale(const Tensor& a, double s);
// Row i of `a` multiplied by col(i, 0); col is rows x 1.
Tensor mul_col(const Tensor& a, const Tensor& col);
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

// Stacks along the feature (column) dimension.
Tensor concat_feature(const Tensor& a, const Tensor& b);
Tensor concat_feature(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& a, size_t start, size_t count);
Tensor slice_rows(const Tensor& a, size_t start, size_t count);

Tensor relu(const Tensor& a);
// Tanh approximation of the Gaussian error linear unit.
Tensor gelu(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
// Row-wise; with `causal`, entry (i, j) for j > i is excluded.
Tensor softmax(const Tensor& a, bool causal = false);
Tensor log_softmax(const Tensor& a);
// log(max(a, floor)); the gradient is zero where the floor is active.
Tensor log_clamped(const Tensor& a, double floor);
// Row-wise normalization with learned gain/bias (1 x n each).
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = 1e-5);
// Rows of `table` selected by ids.
Tensor embedding_lookup(const Tensor& table, std::span<const int> ids);
// Elementwise product with a constant 0/1 (or scaled) mask of equal shape.
Tensor apply_mask(const Tensor& a, const Tensor& mask);
// Mask with entries 0 (probability `rate`) or 1/(1-rate).
Tensor dropout_mask(size_t rows, size_t cols, double rate, uint64_t seed);

// out(i, ids[j]) += weights(i, j), out is rows x width.
Tensor scatter_cols(const Tensor& weights, std::span<const int> ids, size_t width);
// (1 - p_i) * g(i, :) + p_i * c(i, :), p is rows x 1.
Tensor mix(const Tensor& g, const Tensor& c, const Tensor& p);

Tensor sum(const Tensor& a);
// Sum over rows of -sum_k q_k logp(i, k) with q_target = 1 - eps and
// q_other = eps / (V - 1). Rows whose target is negative are skipped.
Tensor label_smoothed_nll(const Tensor& logp, std::span<const int> targets, double eps);

}  // namespace ops

// Loss for one logit vector (1 x V).
Tensor cross_entropy_label_smoothed(const Tensor& logits, int target, double eps);

// Central-difference check of the gradients of the scalar `f` with respect
// to `params`. At most `max_coords_per_param` coordinates of each parameter
// are sampled (all of them when 0). Returns the maximum of
// |g_ad - g_fd| / max(|g_ad|, |g_fd|, 1e-8). Throws kNonFiniteValue.
double gradcheck(const std::function<Tensor()>& f, std::span<Tensor> params,
                 double h = 1e-5, size_t max_coords_per_param = 0,
                 uint64_t seed = 0);

}  // namespace delib

#endif  // DELIB_TENSOR_H_
