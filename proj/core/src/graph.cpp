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

#include "eve/numeric/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "eve/error.hpp"

namespace eve::nn {

// -- tensor.hpp -----------------------------------------------------------------

template <class T>
Initializer<T> fan_in_uniform(Eigen::Index fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(fan_in, 1)));
  return [bound](Matrix<T>& m, Rng& rng) {
    for (Eigen::Index i = 0; i < m.size(); ++i)
      m.data()[i] = static_cast<T>(rng.uniform(-bound, bound));
  };
}

template <class T>
Initializer<T> constant_init(T value) {
  return [value](Matrix<T>& m, Rng&) { m.setConstant(value); };
}

template <class T>
Parameter<T>& ParameterStore<T>::add(std::string name, Eigen::Index rows, Eigen::Index cols,
                                     Initializer<T> init, Rng& rng) {
  if (index_.count(name)) throw Error("duplicate parameter name " + name);
  auto p = std::make_unique<Parameter<T>>();
  p->name = name;
  p->value = Matrix<T>::Zero(rows, cols);
  p->grad = Matrix<T>::Zero(rows, cols);
  p->init = std::move(init);
  p->init(p->value, rng);
  index_.emplace(std::move(name), params_.size());
  params_.push_back(std::move(p));
  return *params_.back();
}

template <class T>
Parameter<T>& ParameterStore<T>::get(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw Error("unknown parameter " + std::string(name));
  return *params_[it->second];
}

template <class T>
const Parameter<T>& ParameterStore<T>::get(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw Error("unknown parameter " + std::string(name));
  return *params_[it->second];
}

template <class T>
bool ParameterStore<T>::contains(std::string_view name) const {
  return index_.count(std::string(name)) != 0;
}

template <class T>
std::vector<Parameter<T>*> ParameterStore<T>::parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

template <class T>
std::vector<const Parameter<T>*> ParameterStore<T>::parameters() const {
  std::vector<const Parameter<T>*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

template <class T>
std::vector<Parameter<T>*> ParameterStore<T>::with_prefix(std::string_view prefix) {
  std::vector<Parameter<T>*> out;
  for (auto& p : params_)
    if (std::string_view(p->name).starts_with(prefix)) out.push_back(p.get());
  return out;
}

template <class T>
std::size_t ParameterStore<T>::coordinates() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

template <class T>
void ParameterStore<T>::zero_grad() {
  for (auto& p : params_) p->grad.setZero();
}

// -- Graph ----------------------------------------------------------------------

template <class T>
Var<T> Graph<T>::constant(Matrix<T> value) {
  return emplace(std::move(value), false, nullptr);
}

template <class T>
Var<T> Graph<T>::scalar(T value) {
  Matrix<T> m(1, 1);
  m(0, 0) = value;
  return constant(std::move(m));
}

template <class T>
Var<T> Graph<T>::param(Parameter<T>& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var<T>{this, it->second};
  Node node;
  node.external = &p.value;
  node.param = &p;
  node.requires_grad = record_;
  nodes_.push_back(std::move(node));
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_.emplace(&p, id);
  return Var<T>{this, id};
}

template <class T>
const Matrix<T>& Graph<T>::value(Var<T> v) const {
  const Node& n = nodes_[static_cast<std::size_t>(v.id)];
  return n.external ? *n.external : n.value;
}

template <class T>
const Matrix<T>& Graph<T>::grad(Var<T> v) const {
  const Node& n = nodes_[static_cast<std::size_t>(v.id)];
  return n.param ? n.param->grad : n.grad;
}

template <class T>
bool Graph<T>::any_requires_grad(std::initializer_list<Var<T>> vars) const {
  if (!record_) return false;
  for (Var<T> v : vars)
    if (v.valid() && requires_grad(v)) return true;
  return false;
}

template <class T>
Var<T> Graph<T>::emplace(Matrix<T> value, bool requires_grad, Backward backward) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = record_ && requires_grad;
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var<T>{this, static_cast<int>(nodes_.size()) - 1};
}

template <class T>
Matrix<T>& Graph<T>::grad_ref(Var<T> v) {
  Node& n = nodes_[static_cast<std::size_t>(v.id)];
  if (n.param) {
    if (n.param->grad.rows() != n.param->value.rows() ||
        n.param->grad.cols() != n.param->value.cols())
      n.param->grad = Matrix<T>::Zero(n.param->value.rows(), n.param->value.cols());
    return n.param->grad;
  }
  if (n.grad.size() == 0) n.grad = Matrix<T>::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

template <class T>
void Graph<T>::backward(Var<T> root) {
  if (!record_) throw Error("backward() on a non-recording graph");
  const Matrix<T>& rv = value(root);
  if (rv.rows() != 1 || rv.cols() != 1) throw DimensionError("backward root must be 1x1");
  if (!requires_grad(root)) return;
  grad_ref(root)(0, 0) += T(1);
  for (int id = root.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.backward || n.grad.size() == 0) continue;
    n.backward(n.grad, n.external ? *n.external : n.value);
  }
}

// -- helpers --------------------------------------------------------------------

namespace {

template <class T>
Graph<T>& graph_of(Var<T> a) {
  if (!a.valid()) throw Error("invalid Var");
  return *a.graph;
}

template <class T>
Graph<T>& graph_of(Var<T> a, Var<T> b) {
  if (!a.valid() || !b.valid()) throw Error("invalid Var");
  if (a.graph != b.graph) throw Error("operands belong to different graphs");
  return *a.graph;
}

std::string shape_str(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

template <class T>
void require_same_shape(const Matrix<T>& a, const Matrix<T>& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError(std::string(op) + ": shape mismatch (" + shape_str(a.rows(), a.cols()) +
                         " vs " + shape_str(b.rows(), b.cols()) + ")");
}

// Elementwise op; `deriv(x, y)` returns dy/dx for input x and output y.
template <class T, class F, class D>
Var<T> elementwise(Var<T> a, F forward, D deriv) {
  Graph<T>& g = graph_of(a);
  Matrix<T> out = a.value().unaryExpr(forward);
  const bool rg = g.any_requires_grad({a});
  return g.emplace(std::move(out), rg, [a, deriv](const Matrix<T>& dy, const Matrix<T>& y) {
    Graph<T>& gg = *a.graph;
    const Matrix<T>& x = gg.value(a);
    Matrix<T>& dx = gg.grad_ref(a);
    for (Eigen::Index i = 0; i < x.size(); ++i)
      dx.data()[i] += dy.data()[i] * deriv(x.data()[i], y.data()[i]);
  });
}

}  // namespace

// -- dense algebra ----------------------------------------------------------------

template <class T>
Var<T> linear(Var<T> x, Var<T> weight, Var<T> bias) {
  Graph<T>& g = graph_of(x, weight);
  const Matrix<T>& xv = x.value();
  const Matrix<T>& wv = weight.value();
  if (xv.cols() != wv.cols())
    throw DimensionError("linear: input " + shape_str(xv.rows(), xv.cols()) + " vs weight " +
                         shape_str(wv.rows(), wv.cols()));
  Matrix<T> out(xv.rows(), wv.rows());
  out.noalias() = xv * wv.transpose();
  if (bias.valid()) {
    const Matrix<T>& bv = bias.value();
    if (bv.rows() != 1 || bv.cols() != wv.rows()) throw DimensionError("linear: bias shape");
    out.rowwise() += bv.row(0);
  }
  const bool rg = g.any_requires_grad({x, weight, bias});
  return g.emplace(std::move(out), rg, [x, weight, bias](const Matrix<T>& dy, const Matrix<T>&) {
    Graph<T>& gg = *x.graph;
    if (gg.requires_grad(x)) gg.grad_ref(x).noalias() += dy * gg.value(weight);
    if (gg.requires_grad(weight)) gg.grad_ref(weight).noalias() += dy.transpose() * gg.value(x);
    if (bias.valid() && gg.requires_grad(bias)) gg.grad_ref(bias).row(0) += dy.colwise().sum();
  });
}

template <class T>
Var<T> matmul(Var<T> a, Var<T> b) {
  Graph<T>& g = graph_of(a, b);
  if (a.cols() != b.rows())
    throw DimensionError("matmul: " + shape_str(a.rows(), a.cols()) + " x " +
                         shape_str(b.rows(), b.cols()));
  Matrix<T> out(a.rows(), b.cols());
  out.noalias() = a.value() * b.value();
  const bool rg = g.any_requires_grad({a, b});
  return g.emplace(std::move(out), rg, [a, b](const Matrix<T>& dy, const Matrix<T>&) {
    Graph<T>& gg = *a.graph;
    if (gg.requires_grad(a)) gg.grad_ref(a).noalias() += dy * gg.value(b).transpose();
    if (gg.requires_grad(b)) gg.grad_ref(b).noalias() += gg.value(a).transpose() * dy;
  });
}

template <class T>
Var<T> add(Var<T> a, Var<T> b) {
  Graph<T>& g = graph_of(a, b);
  require_same_shape(a.value(), b.value(), "add");
  Matrix<T> out = a.value() + b.value();
  const bool rg = g.any_requires_grad({a, b});
  return g.emplace(std::move(out), rg, [a, b](const Matrix<T>& dy, const Matrix<T>&) {
    Graph<T>& gg = *a.graph;
    if (gg.requires_grad(a)) gg.grad_ref(a) += dy;
    if (gg.requires_grad(b)) gg.grad_ref(b) += dy;
  });
}

template <class T>
Var<T> sub(Var<T> a, Var<T> b) {
  Graph<T>& g = graph_of(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  Matrix<T> out = a.value() - b.value();
  const bool rg = g.any_requires_grad({a, b});
  return g.emplace(std::move(out), rg, [a, b](const Matrix<T>& dy, const Matrix<T>&) {
    Graph<T>& gg = *a.graph;
    if (gg.requires_grad(a)) gg.grad_ref(a) += dy;
    if (gg.requires_grad(b)) gg.grad_ref(b) -= dy;
  });
}

template <class T>
Var<T> mul(Var<T> a, Var<T> b) {
  Graph<T>& g = graph_of(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  Matrix<T> out = a.value().cwiseProduct(b.value());
  const bool rg = g.any_requires_grad({a, b});
  return g.emplace(std::move(out), rg, [a, b](const Matrix<T>& dy, const Matrix<T>&) {
    Graph<T>& gg = *a.graph;
    if (gg.requires_grad(a)) gg.grad_ref(a) += dy.cwiseProduct(gg.value(b));
    if (gg.requires_grad(b)) gg.grad_ref(b) += dy.cwiseProduct(gg.value(a));
  });
}

template <class T>
Var<T> scale(Var<T> a, T factor) {
  Graph<T>& g = graph_of(a);
  Matrix<T> out = a.value() * factor;
  const bool rg = g.any_requires_grad({a});
  return g.emplace(std::move(out), rg, [a, factor](const Matrix<T>& dy, const Matrix<T>&) {
    a.graph->grad_ref(a) += dy * factor;
  });
}

template <class T>
Var<T> shift(Var<T> a, T offset) {
  Graph<T>& g = graph_of(a);
  Matrix<T> out = a.value().array() + offset;
  const bool rg = g.any_requires_grad({a});
  return g.emplace(std::move(out), rg, [a](const Matrix<T>& dy, const Matrix<T>&) {
    a.graph->grad_ref(a) += dy;
  });
}

template <class T>
Var<T> add_row(Var<T> a, Var<T> row) {
  Graph<T>& g = graph_of(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) throw DimensionError("add_row: shape mismatch");
  Matrix<T> out = a.value();
  out.rowwise() += row.value().row(0);
  const bool rg = g.any_requires_grad({a, row});
  return g.emplace(std::move(out), rg, [a, row](const Matrix<T>& dy, const Matrix<T>&) {
    Graph<T>& gg = *a.graph;
    if (gg.requires_grad(a)) gg.grad_ref(a) += dy;
    if (gg.requires_grad(row)) gg.grad_ref(row).row(0) += dy.colwise().sum();
  });
}

template <class T>
Var<T> mul_col(Var<T> a, Var<T> col) {
  Graph<T>& g = graph_of(a, col);
  if (col.cols() != 1 || col.rows() != a.rows()) throw DimensionError("mul_col: shape mismatch");
  Matrix<T> out = a.value().array().colwise() * col.value().col(0).array();
  const bool rg = g.any_requires_grad({a, col});
  return g.emplace(std::move(out), rg, [a, col](const Matrix<T>& dy, const Matrix<T>&) {
    Graph<T>& gg = *a.graph;
    if (gg.requires_grad(a))
      gg.grad_ref(a).array() += dy.array().colwise() * gg.value(col).col(0).array();
    if (gg.requires_grad(col))
      gg.grad_ref(col).col(0) += dy.cwiseProduct(gg.value(a)).rowwise().sum();
  });
}

// -- elementwise ------------------------------------------------------------------

template <class T>
Var<T> sigmoid(Var<T> a) {
  return elementwise(
      a, [](T x) { return T(1) / (T(1) + std::exp(-x)); },
      [](T, T y) { return y * (T(1) - y); });
}

template <class T>
Var<T> tanh(Var<T> a) {
  return elementwise(
      a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <class T>
Var<T> relu(Var<T> a) {
  return elementwise(
      a, [](T x) { return x > T(0) ? x : T(0); }, [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <class T>
Var<T> exp(Var<T> a) {
  return elementwise(
      a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <class T>
Var<T> square(Var<T> a) {
  return elementwise(
      a, [](T x) { return x * x; }, [](T x, T) { return T(2) * x; });
}

template <class T>
Var<T> sqrt(Var<T> a) {
  return elementwise(
      a, [](T x) { return std::sqrt(x); }, [](T, T y) { return T(0.5) / y; });
}

template <class T>
Var<T> reciprocal(Var<T> a) {
  return elementwise(
      a, [](T x) { return T(1) / x; }, [](T, T y) { return -y * y; });
}

template <class T>
Var<T> clamp(Var<T> a, T lo, T hi) {
  return elementwise(
      a, [lo, hi](T x) { return std::min(std::max(x, lo), hi); },
      [lo, hi](T x, T) { return (x > lo && x < hi) ? T(1) : T(0); });
}

// -- shape ----------------------------------------------------------------------

template <class T>
Var<T> concat_cols(std::span<const Var<T>> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no parts");
  Graph<T>& g = graph_of(parts[0]);
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  bool rg = false;
  for (const Var<T>& p : parts) {
    if (p.graph != &g) throw Error("operands belong to different graphs");
    if (p.rows() != rows) throw DimensionError("concat_cols: row mismatch");
    cols += p.cols();
    rg = rg || g.any_requires_grad({p});
  }
  Matrix<T> out(rows, cols);
  Eigen::Index offset = 0;
  for (const Var<T>& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    offset += p.cols();
  }
  std::vector<Var<T>> inputs(parts.begin(), parts.end());
  return g.emplace(std::move(out), rg, [inputs](const Matrix<T>& dy, const Matrix<T>&) {
    Eigen::Index off = 0;
    for (const Var<T>& p : inputs) {
      const Eigen::Index c = p.cols();
      if (p.graph->requires_grad(p)) p.graph->grad_ref(p) += dy.middleCols(off, c);
      off += c;
    }
  });
}

template <class T>
Var<T> concat_cols(std::initializer_list<Var<T>> parts) {
  return concat_cols(std::span<const Var<T>>(parts.begin(), parts.size()));
}

template <class T>
Var<T> slice_cols(Var<T> a, Eigen::Index start, Eigen::Index count) {
  Graph<T>& g = graph_of(a);
  if (start < 0 || count < 0 || start + count > a.cols()) throw DimensionError("slice_cols: range");
  Matrix<T> out = a.value().middleCols(start, count);
  const bool rg = g.any_requires_grad({a});
  return g.emplace(std::move(out), rg, [a, start, count](const Matrix<T>& dy, const Matrix<T>&) {
    a.graph->grad_ref(a).middleCols(start, count) += dy;
  });
}

template <class T>
Var<T> vstack(std::span<const Var<T>> parts) {
  if (parts.empty()) throw DimensionError("vstack: no parts");
  Graph<T>& g = graph_of(parts[0]);
  const Eigen::Index cols = parts[0].cols();
  Eigen::Index rows = 0;
  bool rg = false;
  for (const Var<T>& p : parts) {
    if (p.graph != &g) throw Error("operands belong to different graphs");
    if (p.cols() != cols) throw DimensionError("vstack: column mismatch");
    rows += p.rows();
    rg = rg || g.any_requires_grad({p});
  }
  Matrix<T> out(rows, cols);
  Eigen::Index offset = 0;
  for (const Var<T>& p : parts) {
    out.middleRows(offset, p.rows()) = p.value();
    offset += p.rows();
  }
  std::vector<Var<T>> inputs(parts.begin(), parts.end());
  return g.emplace(std::move(out), rg, [inputs](const Matrix<T>& dy, const Matrix<T>&) {
    Eigen::Index off = 0;
    for (const Var<T>& p : inputs) {
      const Eigen::Index r = p.rows();
      if (p.graph->requires_grad(p)) p.graph->grad_ref(p) += dy.middleRows(off, r);
      off += r;
    }
  });
}

template <class T>
Var<T> slice_rows(Var<T> a, Eigen::Index start, Eigen::Index count) {
  Graph<T>& g = graph_of(a);
  if (start < 0 || count < 0 || start + count > a.rows()) throw DimensionError("slice_rows: range");
  Matrix<T> out = a.value().middleRows(start, count);
  const bool rg = g.any_requires_grad({a});
  return g.emplace(std::move(out), rg, [a, start, count](const Matrix<T>& dy, const Matrix<T>&) {
    a.graph->grad_ref(a).middleRows(start, count) += dy;
  });
}

// -- gathers ----------------------------------------------------------------------

template <class T>
Var<T> embedding(Var<T> table, std::span<const int> ids) {
  Graph<T>& g = graph_of(table);
  const Matrix<T>& tv = table.value();
  Matrix<T> out(static_cast<Eigen::Index>(ids.size()), tv.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || ids[r] >= tv.rows())
      throw DimensionError("embedding: id " + std::to_string(ids[r]) + " out of range");
    out.row(static_cast<Eigen::Index>(r)) = tv.row(ids[r]);
  }
  const bool rg = g.any_requires_grad({table});
  std::vector<int> idv(ids.begin(), ids.end());
  return g.emplace(std::move(out), rg, [table, idv](const Matrix<T>& dy, const Matrix<T>&) {
    Matrix<T>& dt = table.graph->grad_ref(table);
    for (std::size_t r = 0; r < idv.size(); ++r) dt.row(idv[r]) += dy.row(static_cast<Eigen::Index>(r));
  });
}

template <class T>
Var<T> blend(std::span<const T> mask, Var<T> a, Var<T> b) {
  Graph<T>& g = graph_of(a, b);
  require_same_shape(a.value(), b.value(), "blend");
  if (static_cast<Eigen::Index>(mask.size()) != a.rows()) throw DimensionError("blend: mask size");
  Matrix<T> out(a.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    out.row(r) = mask[static_cast<std::size_t>(r)] != T(0) ? a.value().row(r) : b.value().row(r);
  const bool rg = g.any_requires_grad({a, b});
  std::vector<T> m(mask.begin(), mask.end());
  return g.emplace(std::move(out), rg, [a, b, m](const Matrix<T>& dy, const Matrix<T>&) {
    Graph<T>& gg = *a.graph;
    const bool ga = gg.requires_grad(a), gb = gg.requires_grad(b);
    for (Eigen::Index r = 0; r < dy.rows(); ++r) {
      if (m[static_cast<std::size_t>(r)] != T(0)) {
        if (ga) gg.grad_ref(a).row(r) += dy.row(r);
      } else if (gb) {
        gg.grad_ref(b).row(r) += dy.row(r);
      }
    }
  });
}

template <class T>
Var<T> gather_steps(std::span<const Var<T>> steps, std::span<const int> step_of_row) {
  if (steps.empty()) throw DimensionError("gather_steps: no steps");
  Graph<T>& g = graph_of(steps[0]);
  const Eigen::Index rows = steps[0].rows(), cols = steps[0].cols();
  if (static_cast<Eigen::Index>(step_of_row.size()) != rows)
    throw DimensionError("gather_steps: index size");
  bool rg = false;
  Matrix<T> out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const int s = step_of_row[static_cast<std::size_t>(r)];
    if (s < 0 || s >= static_cast<int>(steps.size())) throw DimensionError("gather_steps: step index");
    out.row(r) = steps[static_cast<std::size_t>(s)].value().row(r);
  }
  for (const Var<T>& s : steps) rg = rg || g.any_requires_grad({s});
  std::vector<Var<T>> inputs(steps.begin(), steps.end());
  std::vector<int> idx(step_of_row.begin(), step_of_row.end());
  return g.emplace(std::move(out), rg, [inputs, idx](const Matrix<T>& dy, const Matrix<T>&) {
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const Var<T>& s = inputs[static_cast<std::size_t>(idx[r])];
      if (s.graph->requires_grad(s))
        s.graph->grad_ref(s).row(static_cast<Eigen::Index>(r)) += dy.row(static_cast<Eigen::Index>(r));
    }
  });
}

// -- reductions -------------------------------------------------------------------

template <class T>
Var<T> row_sum(Var<T> a) {
  Graph<T>& g = graph_of(a);
  Matrix<T> out = a.value().rowwise().sum();
  const bool rg = g.any_requires_grad({a});
  return g.emplace(std::move(out), rg, [a](const Matrix<T>& dy, const Matrix<T>&) {
    a.graph->grad_ref(a).colwise() += dy.col(0);
  });
}

template <class T>
Var<T> sum(Var<T> a) {
  Graph<T>& g = graph_of(a);
  Matrix<T> out(1, 1);
  out(0, 0) = a.value().sum();
  const bool rg = g.any_requires_grad({a});
  return g.emplace(std::move(out), rg, [a](const Matrix<T>& dy, const Matrix<T>&) {
    a.graph->grad_ref(a).array() += dy(0, 0);
  });
}

template <class T>
Var<T> row_dot(Var<T> a, Var<T> b) {
  Graph<T>& g = graph_of(a, b);
  require_same_shape(a.value(), b.value(), "row_dot");
  Matrix<T> out = a.value().cwiseProduct(b.value()).rowwise().sum();
  const bool rg = g.any_requires_grad({a, b});
  return g.emplace(std::move(out), rg, [a, b](const Matrix<T>& dy, const Matrix<T>&) {
    Graph<T>& gg = *a.graph;
    if (gg.requires_grad(a)) gg.grad_ref(a).array() += gg.value(b).array().colwise() * dy.col(0).array();
    if (gg.requires_grad(b)) gg.grad_ref(b).array() += gg.value(a).array().colwise() * dy.col(0).array();
  });
}

template <class T>
Var<T> row_norm(Var<T> a) {
  Graph<T>& g = graph_of(a);
  Matrix<T> out = a.value().rowwise().norm();
  const bool rg = g.any_requires_grad({a});
  return g.emplace(std::move(out), rg, [a](const Matrix<T>& dy, const Matrix<T>& y) {
    Graph<T>& gg = *a.graph;
    const Matrix<T>& x = gg.value(a);
    Matrix<T>& dx = gg.grad_ref(a);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      if (y(r, 0) > T(0)) dx.row(r) += (dy(r, 0) / y(r, 0)) * x.row(r);
    }
  });
}

// -- probability ------------------------------------------------------------------

namespace {

template <class T>
Matrix<T> log_softmax_rows(const Matrix<T>& x) {
  Matrix<T> out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const T mx = x.row(r).maxCoeff();
    const T lse = mx + std::log((x.row(r).array() - mx).exp().sum());
    out.row(r) = x.row(r).array() - lse;
  }
  return out;
}

}  // namespace

template <class T>
Var<T> softmax(Var<T> a) {
  Graph<T>& g = graph_of(a);
  Matrix<T> out = log_softmax_rows(a.value()).array().exp();
  const bool rg = g.any_requires_grad({a});
  return g.emplace(std::move(out), rg, [a](const Matrix<T>& dy, const Matrix<T>& y) {
    Matrix<T>& dx = a.graph->grad_ref(a);
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const T dot = dy.row(r).dot(y.row(r));
      for (Eigen::Index c = 0; c < y.cols(); ++c) {
        if (y(r, c) != T(0)) dx(r, c) += y(r, c) * (dy(r, c) - dot);
      }
    }
  });
}

template <class T>
Var<T> log_softmax(Var<T> a) {
  Graph<T>& g = graph_of(a);
  Matrix<T> out = log_softmax_rows(a.value());
  const bool rg = g.any_requires_grad({a});
  return g.emplace(std::move(out), rg, [a](const Matrix<T>& dy, const Matrix<T>& y) {
    Matrix<T>& dx = a.graph->grad_ref(a);
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const T total = dy.row(r).sum();
      dx.row(r) += dy.row(r) - total * y.row(r).array().exp().matrix();
    }
  });
}

template <class T>
Var<T> softmax_cross_entropy(Var<T> logits, std::span<const SparseTarget> targets) {
  Graph<T>& g = graph_of(logits);
  const Matrix<T>& x = logits.value();
  for (const SparseTarget& t : targets) {
    if (t.row < 0 || t.row >= x.rows() || t.col < 0 || t.col >= x.cols())
      throw DimensionError("softmax_cross_entropy: target (" + std::to_string(t.row) + ", " +
                           std::to_string(t.col) + ") out of range");
  }
  Matrix<T> logp = log_softmax_rows(x);
  T loss = 0;
  for (const SparseTarget& t : targets) loss -= static_cast<T>(t.weight) * logp(t.row, t.col);
  Matrix<T> out(1, 1);
  out(0, 0) = loss;
  const bool rg = g.any_requires_grad({logits});
  std::vector<SparseTarget> tv(targets.begin(), targets.end());
  return g.emplace(std::move(out), rg,
                   [logits, tv, logp = std::move(logp)](const Matrix<T>& dy, const Matrix<T>&) {
                     const T up = dy(0, 0);
                     Matrix<T>& dx = logits.graph->grad_ref(logits);
                     std::vector<T> row_weight(static_cast<std::size_t>(logp.rows()), T(0));
                     for (const SparseTarget& t : tv) {
                       row_weight[static_cast<std::size_t>(t.row)] += static_cast<T>(t.weight);
                       dx(t.row, t.col) -= up * static_cast<T>(t.weight);
                     }
                     for (Eigen::Index r = 0; r < logp.rows(); ++r) {
                       const T w = row_weight[static_cast<std::size_t>(r)];
                       if (w != T(0)) dx.row(r) += (up * w) * logp.row(r).array().exp().matrix();
                     }
                   });
}

template <class T>
Var<T> sigmoid_cross_entropy(Var<T> logits, const Matrix<T>& targets) {
  Graph<T>& g = graph_of(logits);
  const Matrix<T>& x = logits.value();
  require_same_shape(x, targets, "sigmoid_cross_entropy");
  // log(1 + exp(-|x|)) + max(x, 0) - x * t
  T loss = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const T v = x.data()[i];
    loss += std::log1p(std::exp(-std::abs(v))) + std::max(v, T(0)) - v * targets.data()[i];
  }
  Matrix<T> out(1, 1);
  out(0, 0) = loss;
  const bool rg = g.any_requires_grad({logits});
  return g.emplace(std::move(out), rg, [logits, targets](const Matrix<T>& dy, const Matrix<T>&) {
    const Matrix<T>& xv = logits.graph->value(logits);
    Matrix<T>& dx = logits.graph->grad_ref(logits);
    for (Eigen::Index i = 0; i < xv.size(); ++i) {
      const T p = T(1) / (T(1) + std::exp(-xv.data()[i]));
      dx.data()[i] += dy(0, 0) * (p - targets.data()[i]);
    }
  });
}

// -- attention --------------------------------------------------------------------

template <class T>
Var<T> attention_scores(Var<T> query, Var<T> keys, std::span<const int> lengths,
                        std::span<const int> src_of_row) {
  Graph<T>& g = graph_of(query, keys);
  const Matrix<T>& q = query.value();
  const Matrix<T>& k = keys.value();
  const auto sources = static_cast<Eigen::Index>(lengths.size());
  if (sources == 0 || k.rows() % sources != 0) throw DimensionError("attention_scores: key rows");
  if (q.cols() != k.cols()) throw DimensionError("attention_scores: query/key width");
  if (static_cast<Eigen::Index>(src_of_row.size()) != q.rows())
    throw DimensionError("attention_scores: row map size");
  const Eigen::Index steps = k.rows() / sources;
  Matrix<T> out(q.rows(), steps);
  for (Eigen::Index b = 0; b < q.rows(); ++b) {
    const int s = src_of_row[static_cast<std::size_t>(b)];
    if (s < 0 || s >= sources) throw DimensionError("attention_scores: source index");
    const int len = lengths[static_cast<std::size_t>(s)];
    if (len < 1 || len > steps) throw DimensionError("attention_scores: length out of range");
    for (Eigen::Index t = 0; t < steps; ++t) {
      out(b, t) = t < len ? q.row(b).dot(k.row(t * sources + s))
                          : -std::numeric_limits<T>::infinity();
    }
  }
  const bool rg = g.any_requires_grad({query, keys});
  std::vector<int> lens(lengths.begin(), lengths.end());
  std::vector<int> map(src_of_row.begin(), src_of_row.end());
  return g.emplace(std::move(out), rg,
                   [query, keys, lens, map, sources, steps](const Matrix<T>& dy, const Matrix<T>&) {
                     Graph<T>& gg = *query.graph;
                     const Matrix<T>& qv = gg.value(query);
                     const Matrix<T>& kv = gg.value(keys);
                     const bool gq = gg.requires_grad(query), gk = gg.requires_grad(keys);
                     for (Eigen::Index b = 0; b < qv.rows(); ++b) {
                       const int s = map[static_cast<std::size_t>(b)];
                       const int len = lens[static_cast<std::size_t>(s)];
                       for (Eigen::Index t = 0; t < std::min<Eigen::Index>(len, steps); ++t) {
                         const T d = dy(b, t);
                         if (d == T(0)) continue;
                         if (gq) gg.grad_ref(query).row(b) += d * kv.row(t * sources + s);
                         if (gk) gg.grad_ref(keys).row(t * sources + s) += d * qv.row(b);
                       }
                     }
                   });
}

template <class T>
Var<T> attention_context(Var<T> weights, Var<T> values, std::span<const int> src_of_row) {
  Graph<T>& g = graph_of(weights, values);
  const Matrix<T>& w = weights.value();
  const Matrix<T>& v = values.value();
  const Eigen::Index steps = w.cols();
  if (steps == 0 || v.rows() % steps != 0) throw DimensionError("attention_context: value rows");
  const Eigen::Index sources = v.rows() / steps;
  if (static_cast<Eigen::Index>(src_of_row.size()) != w.rows())
    throw DimensionError("attention_context: row map size");
  Matrix<T> out = Matrix<T>::Zero(w.rows(), v.cols());
  for (Eigen::Index b = 0; b < w.rows(); ++b) {
    const int s = src_of_row[static_cast<std::size_t>(b)];
    if (s < 0 || s >= sources) throw DimensionError("attention_context: source index");
    for (Eigen::Index t = 0; t < steps; ++t) {
      if (w(b, t) != T(0)) out.row(b) += w(b, t) * v.row(t * sources + s);
    }
  }
  const bool rg = g.any_requires_grad({weights, values});
  std::vector<int> map(src_of_row.begin(), src_of_row.end());
  return g.emplace(std::move(out), rg,
                   [weights, values, map, sources, steps](const Matrix<T>& dy, const Matrix<T>&) {
                     Graph<T>& gg = *weights.graph;
                     const Matrix<T>& wv = gg.value(weights);
                     const Matrix<T>& vv = gg.value(values);
                     const bool gw = gg.requires_grad(weights), gv = gg.requires_grad(values);
                     for (Eigen::Index b = 0; b < wv.rows(); ++b) {
                       const int s = map[static_cast<std::size_t>(b)];
                       for (Eigen::Index t = 0; t < steps; ++t) {
                         if (gw) gg.grad_ref(weights)(b, t) += dy.row(b).dot(vv.row(t * sources + s));
                         if (gv && wv(b, t) != T(0))
                           gg.grad_ref(values).row(t * sources + s) += wv(b, t) * dy.row(b);
                       }
                     }
                   });
}

// -- instantiation ----------------------------------------------------------------

#define EVE_INSTANTIATE_GRAPH(T)                                                              \
  template Initializer<T> fan_in_uniform<T>(Eigen::Index);                                    \
  template Initializer<T> constant_init<T>(T);                                                \
  template class ParameterStore<T>;                                                           \
  template class Graph<T>;                                                                    \
  template Var<T> linear<T>(Var<T>, Var<T>, Var<T>);                                          \
  template Var<T> matmul<T>(Var<T>, Var<T>);                                                  \
  template Var<T> add<T>(Var<T>, Var<T>);                                                     \
  template Var<T> sub<T>(Var<T>, Var<T>);                                                     \
  template Var<T> mul<T>(Var<T>, Var<T>);                                                     \
  template Var<T> scale<T>(Var<T>, T);                                                        \
  template Var<T> shift<T>(Var<T>, T);                                                        \
  template Var<T> add_row<T>(Var<T>, Var<T>);                                                 \
  template Var<T> mul_col<T>(Var<T>, Var<T>);                                                 \
  template Var<T> sigmoid<T>(Var<T>);                                                         \
  template Var<T> tanh<T>(Var<T>);                                                            \
  template Var<T> relu<T>(Var<T>);                                                            \
  template Var<T> exp<T>(Var<T>);                                                             \
  template Var<T> square<T>(Var<T>);                                                          \
  template Var<T> sqrt<T>(Var<T>);                                                            \
  template Var<T> reciprocal<T>(Var<T>);                                                      \
  template Var<T> clamp<T>(Var<T>, T, T);                                                     \
  template Var<T> concat_cols<T>(std::span<const Var<T>>);                                    \
  template Var<T> concat_cols<T>(std::initializer_list<Var<T>>);                              \
  template Var<T> slice_cols<T>(Var<T>, Eigen::Index, Eigen::Index);                          \
  template Var<T> vstack<T>(std::span<const Var<T>>);                                         \
  template Var<T> slice_rows<T>(Var<T>, Eigen::Index, Eigen::Index);                          \
  template Var<T> embedding<T>(Var<T>, std::span<const int>);                                 \
  template Var<T> blend<T>(std::span<const T>, Var<T>, Var<T>);                               \
  template Var<T> gather_steps<T>(std::span<const Var<T>>, std::span<const int>);             \
  template Var<T> row_sum<T>(Var<T>);                                                         \
  template Var<T> sum<T>(Var<T>);                                                             \
  template Var<T> row_dot<T>(Var<T>, Var<T>);                                                 \
  template Var<T> row_norm<T>(Var<T>);                                                        \
  template Var<T> softmax<T>(Var<T>);                                                         \
  template Var<T> log_softmax<T>(Var<T>);                                                     \
  template Var<T> softmax_cross_entropy<T>(Var<T>, std::span<const SparseTarget>);            \
  template Var<T> sigmoid_cross_entropy<T>(Var<T>, const Matrix<T>&);                         \
  template Var<T> attention_scores<T>(Var<T>, Var<T>, std::span<const int>, std::span<const int>); \
  template Var<T> attention_context<T>(Var<T>, Var<T>, std::span<const int>);

EVE_INSTANTIATE_GRAPH(float)
EVE_INSTANTIATE_GRAPH(double)

}  // namespace eve::nn
