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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "delib/error.h"
#include "delib/random.h"

namespace delib {
namespace {

thread_local Tape* g_active_tape = nullptr;

using NodePtr = std::shared_ptr<TensorNode>;

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw Error(ErrorCode::kShapeMismatch, std::string(op) + ": " +
                                             a.shape_string() + " vs " +
                                             b.shape_string());
}

bool tracking(std::initializer_list<const Tensor*> inputs) {
  if (g_active_tape == nullptr) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

// Marks `out` as differentiable and records `fn(out_node)` on the active
// tape; `fn` runs only if some gradient reached `out`.
template <class F>
void record(Tensor& out, F fn) {
  out.set_requires_grad(true);
  g_active_tape->record([o = out.shared_node(), fn = std::move(fn)]() {
    if (o->grad.empty()) return;
    fn(*o);
  });
}

// C(m x n) += A(m x k) B(k x n)
void gemm_nn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i) {
    double* __restrict crow = c + i * n;
    for (size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      const double* __restrict brow = b + p * n;
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C(m x n) += A(m x k) B(n x k)^T
void gemm_nt(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i) {
    const double* __restrict arow = a + i * k;
    for (size_t j = 0; j < n; ++j) {
      const double* __restrict brow = b + j * k;
      double acc = 0.0;
      for (size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      c[i * n + j] += acc;
    }
  }
}

// C(m x n) += A(k x m)^T B(k x n)
void gemm_tn(const double* a, const double* b, double* c, size_t k, size_t m, size_t n) {
  for (size_t p = 0; p < k; ++p) {
    const double* __restrict brow = b + p * n;
    for (size_t i = 0; i < m; ++i) {
      const double av = a[p * m + i];
      if (av == 0.0) continue;
      double* __restrict crow = c + i * n;
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

Tensor unary(const Tensor& a, double (*f)(double)) {
  Tensor out(a.rows(), a.cols());
  auto in = a.values();
  auto o = out.mutable_values();
  for (size_t i = 0; i < in.size(); ++i) o[i] = f(in[i]);
  return out;
}

}  // namespace

Tensor::Tensor(size_t rows, size_t cols, double fill)
    : node_(std::make_shared<TensorNode>()) {
  node_->rows = rows;
  node_->cols = cols;
  node_->value.assign(rows * cols, fill);
}

Tensor::Tensor(size_t rows, size_t cols, std::vector<double> values)
    : node_(std::make_shared<TensorNode>()) {
  if (values.size() != rows * cols) {
    throw Error(ErrorCode::kShapeMismatch,
                "data length " + std::to_string(values.size()) + " for shape [" +
                    std::to_string(rows) + "x" + std::to_string(cols) + "]");
  }
  node_->rows = rows;
  node_->cols = cols;
  node_->value = std::move(values);
}

Tensor Tensor::row(std::vector<double> values) {
  const size_t n = values.size();
  return Tensor(1, n, std::move(values));
}

std::string Tensor::shape_string() const {
  if (!defined()) return "[undefined]";
  return "[" + std::to_string(rows()) + "x" + std::to_string(cols()) + "]";
}

double Tensor::item() const {
  if (size() != 1) {
    throw Error(ErrorCode::kShapeMismatch, "item() on " + shape_string());
  }
  return node_->value[0];
}

Tensor Tensor::detach() const {
  return Tensor(rows(), cols(), node_->value);
}

Tensor Tensor::row_at(size_t r) const { return ops::slice_rows(*this, r, 1); }

void Tape::backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw Error(ErrorCode::kShapeMismatch, "backward on non-scalar " + loss.shape_string());
  }
  loss.node()->grad_buffer()[0] += 1.0;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

Tape* Tape::active() { return g_active_tape; }

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

NoGradScope::NoGradScope() : previous_(g_active_tape) { g_active_tape = nullptr; }
NoGradScope::~NoGradScope() { g_active_tape = previous_; }

namespace ops {

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  const size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor out(m, n);
  gemm_nn(a.values().data(), b.values().data(), out.mutable_values().data(), m, k, n);
  if (tracking({&a, &b})) {
    record(out, [a = a.shared_node(), b = b.shared_node(), m, k, n](TensorNode& o) {
      if (a->requires_grad) gemm_nt(o.grad.data(), b->value.data(), a->grad_buffer().data(), m, n, k);
      if (b->requires_grad) gemm_tn(a->value.data(), o.grad.data(), b->grad_buffer().data(), m, k, n);
    });
  }
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) shape_error("matmul_nt", a, b);
  const size_t m = a.rows(), k = a.cols(), n = b.rows();
  Tensor out(m, n);
  gemm_nt(a.values().data(), b.values().data(), out.mutable_values().data(), m, k, n);
  if (tracking({&a, &b})) {
    record(out, [a = a.shared_node(), b = b.shared_node(), m, k, n](TensorNode& o) {
      if (a->requires_grad) gemm_nn(o.grad.data(), b->value.data(), a->grad_buffer().data(), m, n, k);
      if (b->requires_grad) gemm_tn(o.grad.data(), a->value.data(), b->grad_buffer().data(), m, n, k);
    });
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("add", a, b);
  Tensor out(a.rows(), a.cols());
  auto o = out.mutable_values();
  auto av = a.values(), bv = b.values();
  for (size_t i = 0; i < o.size(); ++i) o[i] = av[i] + bv[i];
  if (tracking({&a, &b})) {
    record(out, [a = a.shared_node(), b = b.shared_node()](TensorNode& o) {
      for (const NodePtr& in : {a, b}) {
        if (!in->requires_grad) continue;
        auto& g = in->grad_buffer();
        for (size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
      }
    });
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("sub", a, b);
  Tensor out(a.rows(), a.cols());
  auto o = out.mutable_values();
  auto av = a.values(), bv = b.values();
  for (size_t i = 0; i < o.size(); ++i) o[i] = av[i] - bv[i];
  if (tracking({&a, &b})) {
    record(out, [a = a.shared_node(), b = b.shared_node()](TensorNode& o) {
      if (a->requires_grad) {
        auto& g = a->grad_buffer();
        for (size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
      }
      if (b->requires_grad) {
        auto& g = b->grad_buffer();
        for (size_t i = 0; i < g.size(); ++i) g[i] -= o.grad[i];
      }
    });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("mul", a, b);
  Tensor out(a.rows(), a.cols());
  auto o = out.mutable_values();
  auto av = a.values(), bv = b.values();
  for (size_t i = 0; i < o.size(); ++i) o[i] = av[i] * bv[i];
  if (tracking({&a, &b})) {
    record(out, [a = a.shared_node(), b = b.shared_node()](TensorNode& o) {
      if (a->requires_grad) {
        auto& g = a->grad_buffer();
        for (size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * b->value[i];
      }
      if (b->requires_grad) {
        auto& g = b->grad_buffer();
        for (size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * a->value[i];
      }
    });
  }
  return out;
}

Tensor add_row(const Tensor& a, const Tensor& bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) shape_error("add_row", a, bias);
  const size_t m = a.rows(), n = a.cols();
  Tensor out(m, n);
  auto o = out.mutable_values();
  auto av = a.values(), bv = bias.values();
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < n; ++j) o[i * n + j] = av[i * n + j] + bv[j];
  }
  if (tracking({&a, &bias})) {
    record(out, [a = a.shared_node(), b = bias.shared_node(), m, n](TensorNode& o) {
      if (a->requires_grad) {
        auto& g = a->grad_buffer();
        for (size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
      }
      if (b->requires_grad) {
        auto& g = b->grad_buffer();
        for (size_t i = 0; i < m; ++i) {
          for (size_t j = 0; j < n; ++j) g[j] += o.grad[i * n + j];
        }
      }
    });
  }
  return out;
}

Tensor scale(const Tensor& a, double s) {
  Tensor out(a.rows(), a.cols());
  auto o = out.mutable_values();
  auto av = a.values();
  for (size_t i = 0; i < o.size(); ++i) o[i] = av[i] * s;
  if (tracking({&a})) {
    record(out, [a = a.shared_node(), s](TensorNode& o) {
      auto& g = a->grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * s;
    });
  }
  return out;
}

Tensor mul_col(const Tensor& a, const Tensor& col) {
  if (col.cols() != 1 || col.rows() != a.rows()) shape_error("mul_col", a, col);
  const size_t m = a.rows(), n = a.cols();
  Tensor out(m, n);
  auto o = out.mutable_values();
  auto av = a.values(), cv = col.values();
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < n; ++j) o[i * n + j] = av[i * n + j] * cv[i];
  }
  if (tracking({&a, &col})) {
    record(out, [a = a.shared_node(), c = col.shared_node(), m, n](TensorNode& o) {
      if (a->requires_grad) {
        auto& g = a->grad_buffer();
        for (size_t i = 0; i < m; ++i) {
          for (size_t j = 0; j < n; ++j) g[i * n + j] += o.grad[i * n + j] * c->value[i];
        }
      }
      if (c->requires_grad) {
        auto& g = c->grad_buffer();
        for (size_t i = 0; i < m; ++i) {
          double acc = 0.0;
          for (size_t j = 0; j < n; ++j) acc += o.grad[i * n + j] * a->value[i * n + j];
          g[i] += acc;
        }
      }
    });
  }
  return out;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  return add_row(matmul(x, weight), bias);
}

Tensor concat_feature(const Tensor& a, const Tensor& b) {
  const Tensor parts[] = {a, b};
  return concat_feature(parts);
}

Tensor concat_feature(std::span<const Tensor> parts) {
  if (parts.empty()) throw Error(ErrorCode::kShapeMismatch, "concat of nothing");
  const size_t m = parts[0].rows();
  size_t n = 0;
  for (const Tensor& p : parts) {
    if (p.rows() != m) shape_error("concat_feature", parts[0], p);
    n += p.cols();
  }
  Tensor out(m, n);
  auto o = out.mutable_values();
  size_t offset = 0;
  bool any_grad = false;
  for (const Tensor& p : parts) {
    const size_t pc = p.cols();
    auto pv = p.values();
    for (size_t i = 0; i < m; ++i) {
      std::copy_n(pv.begin() + static_cast<std::ptrdiff_t>(i * pc), pc,
                  o.begin() + static_cast<std::ptrdiff_t>(i * n + offset));
    }
    offset += pc;
    any_grad = any_grad || p.requires_grad();
  }
  if (g_active_tape != nullptr && any_grad) {
    std::vector<NodePtr> nodes;
    for (const Tensor& p : parts) nodes.push_back(p.shared_node());
    record(out, [nodes = std::move(nodes), m, n](TensorNode& o) {
      size_t offset = 0;
      for (const NodePtr& p : nodes) {
        const size_t pc = p->cols;
        if (p->requires_grad) {
          auto& g = p->grad_buffer();
          for (size_t i = 0; i < m; ++i) {
            for (size_t j = 0; j < pc; ++j) g[i * pc + j] += o.grad[i * n + offset + j];
          }
        }
        offset += pc;
      }
    });
  }
  return out;
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw Error(ErrorCode::kShapeMismatch, "concat of nothing");
  const size_t n = parts[0].cols();
  size_t m = 0;
  bool any_grad = false;
  for (const Tensor& p : parts) {
    if (p.cols() != n) shape_error("concat_rows", parts[0], p);
    m += p.rows();
    any_grad = any_grad || p.requires_grad();
  }
  std::vector<double> values;
  values.reserve(m * n);
  for (const Tensor& p : parts) values.insert(values.end(), p.values().begin(), p.values().end());
  Tensor out(m, n, std::move(values));
  if (g_active_tape != nullptr && any_grad) {
    std::vector<NodePtr> nodes;
    for (const Tensor& p : parts) nodes.push_back(p.shared_node());
    record(out, [nodes = std::move(nodes)](TensorNode& o) {
      size_t offset = 0;
      for (const NodePtr& p : nodes) {
        if (p->requires_grad) {
          auto& g = p->grad_buffer();
          for (size_t i = 0; i < g.size(); ++i) g[i] += o.grad[offset + i];
        }
        offset += p->value.size();
      }
    });
  }
  return out;
}

Tensor slice_cols(const Tensor& a, size_t start, size_t count) {
  if (start + count > a.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "slice_cols [" + std::to_string(start) + ", " +
                                               std::to_string(start + count) + ") of " +
                                               a.shape_string());
  }
  const size_t m = a.rows(), n = a.cols();
  Tensor out(m, count);
  auto o = out.mutable_values();
  auto av = a.values();
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < count; ++j) o[i * count + j] = av[i * n + start + j];
  }
  if (tracking({&a})) {
    record(out, [a = a.shared_node(), m, n, start, count](TensorNode& o) {
      auto& g = a->grad_buffer();
      for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < count; ++j) g[i * n + start + j] += o.grad[i * count + j];
      }
    });
  }
  return out;
}

Tensor slice_rows(const Tensor& a, size_t start, size_t count) {
  if (start + count > a.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "slice_rows [" + std::to_string(start) + ", " +
                                               std::to_string(start + count) + ") of " +
                                               a.shape_string());
  }
  const size_t n = a.cols();
  auto av = a.values();
  Tensor out(count, n,
             std::vector<double>(av.begin() + static_cast<std::ptrdiff_t>(start * n),
                                 av.begin() + static_cast<std::ptrdiff_t>((start + count) * n)));
  if (tracking({&a})) {
    record(out, [a = a.shared_node(), start, n](TensorNode& o) {
      auto& g = a->grad_buffer();
      for (size_t i = 0; i < o.grad.size(); ++i) g[start * n + i] += o.grad[i];
    });
  }
  return out;
}

Tensor relu(const Tensor& a) {
  Tensor out = unary(a, [](double x) { return x > 0.0 ? x : 0.0; });
  if (tracking({&a})) {
    record(out, [a = a.shared_node()](TensorNode& o) {
      auto& g = a->grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) {
        if (a->value[i] > 0.0) g[i] += o.grad[i];
      }
    });
  }
  return out;
}

Tensor gelu(const Tensor& a) {
  constexpr double kC = 0.7978845608028654;  // sqrt(2 / pi)
  constexpr double kA = 0.044715;
  Tensor out = unary(a, [](double x) {
    return 0.5 * x * (1.0 + std::tanh(kC * (x + kA * x * x * x)));
  });
  if (tracking({&a})) {
    record(out, [a = a.shared_node()](TensorNode& o) {
      auto& g = a->grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) {
        const double x = a->value[i];
        const double t = std::tanh(kC * (x + kA * x * x * x));
        const double dt = (1.0 - t * t) * kC * (1.0 + 3.0 * kA * x * x);
        g[i] += o.grad[i] * (0.5 * (1.0 + t) + 0.5 * x * dt);
      }
    });
  }
  return out;
}

Tensor tanh(const Tensor& a) {
  Tensor out = unary(a, [](double x) { return std::tanh(x); });
  if (tracking({&a})) {
    record(out, [a = a.shared_node()](TensorNode& o) {
      auto& g = a->grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * (1.0 - o.value[i] * o.value[i]);
    });
  }
  return out;
}

Tensor sigmoid(const Tensor& a) {
  Tensor out = unary(a, [](double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  if (tracking({&a})) {
    record(out, [a = a.shared_node()](TensorNode& o) {
      auto& g = a->grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * o.value[i] * (1.0 - o.value[i]);
    });
  }
  return out;
}

Tensor softmax(const Tensor& a, bool causal) {
  const size_t m = a.rows(), n = a.cols();
  Tensor out(m, n);
  auto o = out.mutable_values();
  auto av = a.values();
  for (size_t i = 0; i < m; ++i) {
    const size_t width = causal ? std::min(n, i + 1) : n;
    const double* row = av.data() + i * n;
    double mx = row[0];
    for (size_t j = 1; j < width; ++j) mx = std::max(mx, row[j]);
    double total = 0.0;
    for (size_t j = 0; j < width; ++j) {
      o[i * n + j] = std::exp(row[j] - mx);
      total += o[i * n + j];
    }
    for (size_t j = 0; j < width; ++j) o[i * n + j] /= total;
  }
  if (tracking({&a})) {
    record(out, [a = a.shared_node(), m, n](TensorNode& o) {
      auto& g = a->grad_buffer();
      for (size_t i = 0; i < m; ++i) {
        double dot = 0.0;
        for (size_t j = 0; j < n; ++j) dot += o.grad[i * n + j] * o.value[i * n + j];
        for (size_t j = 0; j < n; ++j) {
          g[i * n + j] += o.value[i * n + j] * (o.grad[i * n + j] - dot);
        }
      }
    });
  }
  return out;
}

Tensor log_softmax(const Tensor& a) {
  const size_t m = a.rows(), n = a.cols();
  Tensor out(m, n);
  auto o = out.mutable_values();
  auto av = a.values();
  for (size_t i = 0; i < m; ++i) {
    const double* row = av.data() + i * n;
    const double mx = *std::max_element(row, row + n);
    double total = 0.0;
    for (size_t j = 0; j < n; ++j) total += std::exp(row[j] - mx);
    const double lse = mx + std::log(total);
    for (size_t j = 0; j < n; ++j) o[i * n + j] = row[j] - lse;
  }
  if (tracking({&a})) {
    record(out, [a = a.shared_node(), m, n](TensorNode& o) {
      auto& g = a->grad_buffer();
      for (size_t i = 0; i < m; ++i) {
        double total = 0.0;
        for (size_t j = 0; j < n; ++j) total += o.grad[i * n + j];
        for (size_t j = 0; j < n; ++j) {
          g[i * n + j] += o.grad[i * n + j] - std::exp(o.value[i * n + j]) * total;
        }
      }
    });
  }
  return out;
}

Tensor log_clamped(const Tensor& a, double floor) {
  Tensor out(a.rows(), a.cols());
  auto o = out.mutable_values();
  auto av = a.values();
  for (size_t i = 0; i < o.size(); ++i) o[i] = std::log(std::max(av[i], floor));
  if (tracking({&a})) {
    record(out, [a = a.shared_node(), floor](TensorNode& o) {
      auto& g = a->grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) {
        if (a->value[i] > floor) g[i] += o.grad[i] / a->value[i];
      }
    });
  }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  const size_t m = x.rows(), n = x.cols();
  if (gain.rows() != 1 || gain.cols() != n) shape_error("layer_norm gain", x, gain);
  if (bias.rows() != 1 || bias.cols() != n) shape_error("layer_norm bias", x, bias);
  Tensor out(m, n);
  std::vector<double> xhat(m * n);
  std::vector<double> inv_std(m);
  auto o = out.mutable_values();
  auto xv = x.values(), gv = gain.values(), bv = bias.values();
  for (size_t i = 0; i < m; ++i) {
    const double* row = xv.data() + i * n;
    double mean = 0.0;
    for (size_t j = 0; j < n; ++j) mean += row[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (size_t j = 0; j < n; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<double>(n);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (size_t j = 0; j < n; ++j) {
      xhat[i * n + j] = (row[j] - mean) * inv_std[i];
      o[i * n + j] = gv[j] * xhat[i * n + j] + bv[j];
    }
  }
  if (tracking({&x, &gain, &bias})) {
    record(out, [x = x.shared_node(), g = gain.shared_node(), b = bias.shared_node(),
                 xhat = std::move(xhat), inv_std = std::move(inv_std), m, n](TensorNode& o) {
      if (g->requires_grad) {
        auto& gg = g->grad_buffer();
        for (size_t i = 0; i < m; ++i) {
          for (size_t j = 0; j < n; ++j) gg[j] += o.grad[i * n + j] * xhat[i * n + j];
        }
      }
      if (b->requires_grad) {
        auto& bg = b->grad_buffer();
        for (size_t i = 0; i < m; ++i) {
          for (size_t j = 0; j < n; ++j) bg[j] += o.grad[i * n + j];
        }
      }
      if (x->requires_grad) {
        auto& xg = x->grad_buffer();
        const double inv_n = 1.0 / static_cast<double>(n);
        for (size_t i = 0; i < m; ++i) {
          double mean_d = 0.0, mean_dx = 0.0;
          for (size_t j = 0; j < n; ++j) {
            const double d = o.grad[i * n + j] * g->value[j];
            mean_d += d;
            mean_dx += d * xhat[i * n + j];
          }
          mean_d *= inv_n;
          mean_dx *= inv_n;
          for (size_t j = 0; j < n; ++j) {
            const double d = o.grad[i * n + j] * g->value[j];
            xg[i * n + j] += inv_std[i] * (d - mean_d - xhat[i * n + j] * mean_dx);
          }
        }
      }
    });
  }
  return out;
}

Tensor embedding_lookup(const Tensor& table, std::span<const int> ids) {
  const size_t n = table.cols();
  Tensor out(ids.size(), n);
  auto o = out.mutable_values();
  auto tv = table.values();
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<size_t>(ids[i]) >= table.rows()) {
      throw Error(ErrorCode::kIdOutOfRange, "id " + std::to_string(ids[i]) +
                                                " for table " + table.shape_string());
    }
    std::copy_n(tv.begin() + static_cast<std::ptrdiff_t>(static_cast<size_t>(ids[i]) * n), n,
                o.begin() + static_cast<std::ptrdiff_t>(i * n));
  }
  if (tracking({&table})) {
    record(out, [t = table.shared_node(), ids = std::vector<int>(ids.begin(), ids.end()),
                 n](TensorNode& o) {
      auto& g = t->grad_buffer();
      for (size_t i = 0; i < ids.size(); ++i) {
        const size_t r = static_cast<size_t>(ids[i]);
        for (size_t j = 0; j < n; ++j) g[r * n + j] += o.grad[i * n + j];
      }
    });
  }
  return out;
}

Tensor apply_mask(const Tensor& a, const Tensor& mask) {
  if (a.shape() != mask.shape()) shape_error("apply_mask", a, mask);
  Tensor out(a.rows(), a.cols());
  auto o = out.mutable_values();
  auto av = a.values(), mv = mask.values();
  for (size_t i = 0; i < o.size(); ++i) o[i] = av[i] * mv[i];
  if (tracking({&a})) {
    record(out, [a = a.shared_node(), m = mask.shared_node()](TensorNode& o) {
      auto& g = a->grad_buffer();
      for (size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * m->value[i];
    });
  }
  return out;
}

Tensor dropout_mask(size_t rows, size_t cols, double rate, uint64_t seed) {
  Tensor mask(rows, cols);
  Rng rng(seed);
  const double keep = rate < 1.0 ? 1.0 / (1.0 - rate) : 0.0;
  for (double& v : mask.mutable_values()) v = rng.bernoulli(rate) ? 0.0 : keep;
  return mask;
}

Tensor scatter_cols(const Tensor& weights, std::span<const int> ids, size_t width) {
  if (weights.cols() != ids.size()) {
    throw Error(ErrorCode::kLengthMismatch, "scatter of " + weights.shape_string() +
                                                " with " + std::to_string(ids.size()) + " ids");
  }
  const size_t m = weights.rows(), t = ids.size();
  for (int id : ids) {
    if (id < 0 || static_cast<size_t>(id) >= width) {
      throw Error(ErrorCode::kIdOutOfRange,
                  "id " + std::to_string(id) + " outside [0, " + std::to_string(width) + ")");
    }
  }
  Tensor out(m, width);
  auto o = out.mutable_values();
  auto wv = weights.values();
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < t; ++j) o[i * width + static_cast<size_t>(ids[j])] += wv[i * t + j];
  }
  if (tracking({&weights})) {
    record(out, [w = weights.shared_node(), ids = std::vector<int>(ids.begin(), ids.end()), m,
                 t, width](TensorNode& o) {
      auto& g = w->grad_buffer();
      for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < t; ++j) g[i * t + j] += o.grad[i * width + static_cast<size_t>(ids[j])];
      }
    });
  }
  return out;
}

Tensor mix(const Tensor& g, const Tensor& c, const Tensor& p) {
  if (g.shape() != c.shape()) shape_error("mix", g, c);
  if (p.cols() != 1 || p.rows() != g.rows()) shape_error("mix", g, p);
  const size_t m = g.rows(), n = g.cols();
  Tensor out(m, n);
  auto o = out.mutable_values();
  auto gv = g.values(), cv = c.values(), pv = p.values();
  for (size_t i = 0; i < m; ++i) {
    const double pc = pv[i];
    const double pg = 1.0 - pc;
    for (size_t j = 0; j < n; ++j) o[i * n + j] = pg * gv[i * n + j] + pc * cv[i * n + j];
  }
  if (tracking({&g, &c, &p})) {
    record(out, [g = g.shared_node(), c = c.shared_node(), p = p.shared_node(), m,
                 n](TensorNode& o) {
      for (size_t i = 0; i < m; ++i) {
        const double pc = p->value[i];
        if (g->requires_grad) {
          auto& gg = g->grad_buffer();
          for (size_t j = 0; j < n; ++j) gg[i * n + j] += (1.0 - pc) * o.grad[i * n + j];
        }
        if (c->requires_grad) {
          auto& cg = c->grad_buffer();
          for (size_t j = 0; j < n; ++j) cg[i * n + j] += pc * o.grad[i * n + j];
        }
        if (p->requires_grad) {
          double acc = 0.0;
          for (size_t j = 0; j < n; ++j) {
            acc += o.grad[i * n + j] * (c->value[i * n + j] - g->value[i * n + j]);
          }
          p->grad_buffer()[i] += acc;
        }
      }
    });
  }
  return out;
}

Tensor sum(const Tensor& a) {
  auto av = a.values();
  Tensor out = Tensor::scalar(std::accumulate(av.begin(), av.end(), 0.0));
  if (tracking({&a})) {
    record(out, [a = a.shared_node()](TensorNode& o) {
      auto& g = a->grad_buffer();
      for (double& v : g) v += o.grad[0];
    });
  }
  return out;
}

Tensor label_smoothed_nll(const Tensor& logp, std::span<const int> targets, double eps) {
  if (targets.size() != logp.rows()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(targets.size()) +
                                                " targets for " + logp.shape_string());
  }
  const size_t m = logp.rows(), n = logp.cols();
  for (int t : targets) {
    if (t >= static_cast<int>(n)) {
      throw Error(ErrorCode::kTargetOutOfRange,
                  "target " + std::to_string(t) + " >= " + std::to_string(n));
    }
  }
  const double on = 1.0 - eps;
  const double off = n > 1 ? eps / static_cast<double>(n - 1) : 0.0;
  auto lv = logp.values();
  double loss = 0.0;
  for (size_t i = 0; i < m; ++i) {
    if (targets[i] < 0) continue;
    const double* row = lv.data() + i * n;
    double others = 0.0;
    for (size_t j = 0; j < n; ++j) {
      if (static_cast<int>(j) != targets[i]) others += row[j];
    }
    loss -= on * row[targets[i]] + off * others;
  }
  Tensor out = Tensor::scalar(loss);
  if (tracking({&logp})) {
    record(out, [l = logp.shared_node(), tg = std::vector<int>(targets.begin(), targets.end()),
                 on, off, n](TensorNode& o) {
      auto& g = l->grad_buffer();
      for (size_t i = 0; i < tg.size(); ++i) {
        if (tg[i] < 0) continue;
        for (size_t j = 0; j < n; ++j) {
          g[i * n + j] -= o.grad[0] * (static_cast<int>(j) == tg[i] ? on : off);
        }
      }
    });
  }
  return out;
}

}  // namespace ops

Tensor cross_entropy_label_smoothed(const Tensor& logits, int target, double eps) {
  if (logits.rows() != 1) {
    throw Error(ErrorCode::kShapeMismatch, "logits must be 1 x V, got " + logits.shape_string());
  }
  if (target < 0 || static_cast<size_t>(target) >= logits.cols()) {
    throw Error(ErrorCode::kTargetOutOfRange,
                "target " + std::to_string(target) + " for V = " + std::to_string(logits.cols()));
  }
  const int targets[] = {target};
  return ops::label_smoothed_nll(ops::log_softmax(logits), targets, eps);
}

double gradcheck(const std::function<Tensor()>& f, std::span<Tensor> params, double h,
                 size_t max_coords_per_param, uint64_t seed) {
  for (Tensor& p : params) p.zero_grad();
  {
    Tape tape;
    TapeScope scope(tape);
    Tensor loss = f();
    if (!std::isfinite(loss.item())) {
      throw Error(ErrorCode::kNonFiniteValue, "loss is " + std::to_string(loss.item()));
    }
    tape.backward(loss);
  }

  Rng rng(seed);
  NoGradScope no_grad;
  double worst = 0.0;
  for (Tensor& p : params) {
    std::vector<size_t> coords(p.size());
    std::iota(coords.begin(), coords.end(), size_t{0});
    if (max_coords_per_param > 0 && coords.size() > max_coords_per_param) {
      rng.shuffle(coords);
      coords.resize(max_coords_per_param);
    }
    auto values = p.mutable_values();
    for (size_t idx : coords) {
      const double saved = values[idx];
      values[idx] = saved + h;
      const double up = f().item();
      values[idx] = saved - h;
      const double down = f().item();
      values[idx] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw Error(ErrorCode::kNonFiniteValue, "non-finite loss under perturbation");
      }
      const double fd = (up - down) / (2.0 * h);
      const double ad = p.has_grad() ? p.grad()[idx] : 0.0;
      const double denom = std::max({std::abs(ad), std::abs(fd), 1e-8});
      worst = std::max(worst, std::abs(ad - fd) / denom);
    }
  }
  return worst;
}

}  // namespace delib
