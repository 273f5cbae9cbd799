// Copyright 2026 The EVE Authors. All Rights Reserved.
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

#pragma once

#include <deque>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "eve/numeric/tensor.hpp"

namespace eve::nn {

template <class T>
class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
template <class T>
struct Var {
  Graph<T>* graph = nullptr;
  int id = -1;

  bool valid() const { return graph != nullptr && id >= 0; }
  const Matrix<T>& value() const { return graph->value(*this); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  /// Value of a 1x1 node.
  T item() const;
};

/// Tape-based reverse-mode differentiation. Nodes are appended in evaluation
/// order and replayed backwards by backward(). A non-recording graph computes
/// values only.
template <class T>
class Graph {
 public:
  /// Receives the gradient and value of the node it belongs to.
  using Backward = std::function<void(const Matrix<T>& out_grad, const Matrix<T>& out_value)>;

  explicit Graph(bool record = true) : record_(record) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const { return record_; }

  Var<T> constant(Matrix<T> value);
  Var<T> scalar(T value);
  /// Node bound to a parameter; repeated calls return the same node.
  /// Gradients flow straight into Parameter::grad.
  Var<T> param(Parameter<T>& p);

  const Matrix<T>& value(Var<T> v) const;
  /// Gradient of the last backward() root w.r.t. v (empty if unreached).
  const Matrix<T>& grad(Var<T> v) const;

  /// Seeds d(root)/d(root) = 1 and runs the tape. Root must be 1x1.
  void backward(Var<T> root);

  std::size_t size() const { return nodes_.size(); }

  // -- op construction interface ---------------------------------------------
  bool requires_grad(Var<T> v) const { return nodes_[static_cast<std::size_t>(v.id)].requires_grad; }
  bool any_requires_grad(std::initializer_list<Var<T>> vars) const;
  /// Appends a node. `backward` is dropped when not recording or when no input
  /// requires a gradient.
  Var<T> emplace(Matrix<T> value, bool requires_grad, Backward backward);
  /// Gradient accumulator of v, zero-initialised on first use.
  Matrix<T>& grad_ref(Var<T> v);

 private:
  struct Node {
    Matrix<T> value;
    const Matrix<T>* external = nullptr;
    Matrix<T> grad;
    Parameter<T>* param = nullptr;
    bool requires_grad = false;
    Backward backward;
  };

  bool record_;
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter<T>*, int> param_nodes_;
};

template <class T>
T Var<T>::item() const {
  return value()(0, 0);
}

/// (row, column, weight) entry of a sparse target matrix.
struct SparseTarget {
  Eigen::Index row;
  Eigen::Index col;
  double weight = 1.0;
};

// -- dense algebra (all operands share one graph) -----------------------------

/// x W^T + b, with W shaped (out, in) and b shaped (1, out); b may be invalid.
template <class T> Var<T> linear(Var<T> x, Var<T> weight, Var<T> bias);
template <class T> Var<T> matmul(Var<T> a, Var<T> b);
template <class T> Var<T> add(Var<T> a, Var<T> b);
template <class T> Var<T> sub(Var<T> a, Var<T> b);
/// Elementwise product.
template <class T> Var<T> mul(Var<T> a, Var<T> b);
template <class T> Var<T> scale(Var<T> a, T factor);
template <class T> Var<T> shift(Var<T> a, T offset);
/// Broadcasts a (1, n) row over every row of a.
template <class T> Var<T> add_row(Var<T> a, Var<T> row);
/// Multiplies row r of a by col(r, 0).
template <class T> Var<T> mul_col(Var<T> a, Var<T> col);

// -- elementwise nonlinearities -----------------------------------------------
template <class T> Var<T> sigmoid(Var<T> a);
template <class T> Var<T> tanh(Var<T> a);
template <class T> Var<T> relu(Var<T> a);
template <class T> Var<T> exp(Var<T> a);
template <class T> Var<T> square(Var<T> a);
template <class T> Var<T> sqrt(Var<T> a);
template <class T> Var<T> reciprocal(Var<T> a);
/// Hard clamp; zero gradient outside (lo, hi).
template <class T> Var<T> clamp(Var<T> a, T lo, T hi);

// -- shape ----------------------------------------------------------------------
template <class T> Var<T> concat_cols(std::span<const Var<T>> parts);
template <class T> Var<T> concat_cols(std::initializer_list<Var<T>> parts);
template <class T> Var<T> slice_cols(Var<T> a, Eigen::Index start, Eigen::Index count);
/// Stacks row blocks vertically.
template <class T> Var<T> vstack(std::span<const Var<T>> parts);
template <class T> Var<T> slice_rows(Var<T> a, Eigen::Index start, Eigen::Index count);

// -- gathers and masks ----------------------------------------------------------
/// Rows of a parameter table.
template <class T> Var<T> embedding(Var<T> table, std::span<const int> ids);
/// mask(r) * a(r, :) + (1 - mask(r)) * b(r, :), mask constant in {0, 1}.
template <class T> Var<T> blend(std::span<const T> mask, Var<T> a, Var<T> b);
/// Row r of the result is row r of steps[step_of_row[r]].
template <class T> Var<T> gather_steps(std::span<const Var<T>> steps, std::span<const int> step_of_row);

// -- reductions -----------------------------------------------------------------
template <class T> Var<T> row_sum(Var<T> a);
template <class T> Var<T> sum(Var<T> a);
template <class T> Var<T> row_dot(Var<T> a, Var<T> b);
template <class T> Var<T> row_norm(Var<T> a);

// -- probability ----------------------------------------------------------------
/// Row-wise, max-subtracted.
template <class T> Var<T> softmax(Var<T> a);
template <class T> Var<T> log_softmax(Var<T> a);
/// -sum_k w_k * log_softmax(logits)[row_k, col_k], as a 1x1 node.
template <class T> Var<T> softmax_cross_entropy(Var<T> logits, std::span<const SparseTarget> targets);
/// sum of per-entry binary cross-entropy with logits; targets in [0, 1].
template <class T> Var<T> sigmoid_cross_entropy(Var<T> logits, const Matrix<T>& targets);

// -- attention memory -------------------------------------------------------------
/// Scores (B, T): scores(b, t) = query(b) . keys(t * S + src(b)) for
/// t < lengths[src(b)], -inf beyond. keys is time-major over S sources.
template <class T>
Var<T> attention_scores(Var<T> query, Var<T> keys, std::span<const int> lengths,
                        std::span<const int> src_of_row);
/// context(b) = sum_t weights(b, t) * values(t * S + src(b)).
template <class T>
Var<T> attention_context(Var<T> weights, Var<T> values, std::span<const int> src_of_row);

// -- checks ---------------------------------------------------------------------
template <class T>
bool all_finite(const Matrix<T>& m) {
  return m.allFinite();
}

}  // namespace eve::nn
