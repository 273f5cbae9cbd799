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

#include "eve/numeric/layers.hpp"

#include <string>

#include "eve/error.hpp"

namespace eve::nn {

template <class T>
Linear<T>::Linear(ParameterStore<T>& store, const std::string& name, Eigen::Index in,
                  Eigen::Index out, Rng& rng, bool bias) {
  weight_ = &store.add(name + ".weight", out, in, fan_in_uniform<T>(in), rng);
  if (bias) bias_ = &store.add(name + ".bias", 1, out, constant_init<T>(), rng);
}

template <class T>
Var<T> Linear<T>::operator()(Graph<T>& g, Var<T> x) const {
  return linear(x, g.param(*weight_), bias_ ? g.param(*bias_) : Var<T>{});
}

template <class T>
Embedding<T>::Embedding(ParameterStore<T>& store, const std::string& name, Eigen::Index vocab,
                        Eigen::Index dim, Rng& rng) {
  table_ = &store.add(name + ".table", vocab, dim, fan_in_uniform<T>(dim), rng);
}

template <class T>
Var<T> Embedding<T>::operator()(Graph<T>& g, std::span<const int> ids) const {
  return embedding(g.param(*table_), ids);
}

template <class T>
Lstm<T>::Lstm(ParameterStore<T>& store, const std::string& name, Eigen::Index input,
              Eigen::Index hidden, Rng& rng)
    : input_(input), hidden_(hidden) {
  weight_ = &store.add(name + ".weight", 4 * hidden, input + hidden,
                       fan_in_uniform<T>(input + hidden), rng);
  const Eigen::Index h = hidden;
  bias_ = &store.add(
      name + ".bias", 1, 4 * hidden,
      [h](Matrix<T>& m, Rng&) {
        m.setZero();
        m.middleCols(h, h).setConstant(T(1));
      },
      rng);
}

template <class T>
LstmState<T> Lstm<T>::zero_state(Graph<T>& g, Eigen::Index rows) const {
  return {g.constant(Matrix<T>::Zero(rows, hidden_)), g.constant(Matrix<T>::Zero(rows, hidden_))};
}

template <class T>
LstmState<T> Lstm<T>::step(Graph<T>& g, const LstmState<T>& state, Var<T> x) const {
  if (x.cols() != input_)
    throw DimensionError("lstm_step: input width " + std::to_string(x.cols()) + ", expected " +
                         std::to_string(input_));
  if (state.h.cols() != hidden_ || state.c.cols() != hidden_ || state.h.rows() != x.rows() ||
      state.c.rows() != x.rows())
    throw DimensionError("lstm_step: state shape");
  const Var<T> gates = linear(concat_cols({x, state.h}), g.param(*weight_), g.param(*bias_));
  const Eigen::Index h = hidden_;
  const Var<T> i = sigmoid(slice_cols(gates, 0, h));
  const Var<T> f = sigmoid(slice_cols(gates, h, h));
  const Var<T> cand = tanh(slice_cols(gates, 2 * h, h));
  const Var<T> o = sigmoid(slice_cols(gates, 3 * h, h));
  const Var<T> c = add(mul(f, state.c), mul(i, cand));
  return {mul(o, tanh(c)), c};
}

template <class T>
BiLstm<T>::BiLstm(ParameterStore<T>& store, const std::string& name, Eigen::Index input,
                  Eigen::Index hidden, Rng& rng)
    : fwd_(store, name + ".fwd", input, hidden, rng), bwd_(store, name + ".bwd", input, hidden, rng) {}

template <class T>
BiLstmOutput<T> BiLstm<T>::encode(Graph<T>& g, std::span<const Var<T>> inputs,
                                  std::span<const int> lengths) const {
  if (inputs.empty()) throw DimensionError("bilstm_encode: empty sequence");
  const auto steps = static_cast<int>(inputs.size());
  const Eigen::Index rows = inputs[0].rows();
  if (static_cast<Eigen::Index>(lengths.size()) != rows)
    throw DimensionError("bilstm_encode: lengths size");
  for (int len : lengths)
    if (len < 1 || len > steps) throw DimensionError("bilstm_encode: length out of range");

  std::vector<std::vector<T>> masks(static_cast<std::size_t>(steps), std::vector<T>(rows));
  bool ragged = false;
  for (int t = 0; t < steps; ++t)
    for (Eigen::Index r = 0; r < rows; ++r) {
      masks[t][r] = t < lengths[r] ? T(1) : T(0);
      ragged = ragged || masks[t][r] == T(0);
    }

  std::vector<Var<T>> fh(steps), bh(steps);
  LstmState<T> s = fwd_.zero_state(g, rows);
  for (int t = 0; t < steps; ++t) {
    LstmState<T> n = fwd_.step(g, s, inputs[t]);
    if (ragged) n = {blend<T>(masks[t], n.h, s.h), blend<T>(masks[t], n.c, s.c)};
    s = n;
    fh[t] = s.h;
  }
  s = bwd_.zero_state(g, rows);
  for (int t = steps - 1; t >= 0; --t) {
    LstmState<T> n = bwd_.step(g, s, inputs[t]);
    if (ragged) n = {blend<T>(masks[t], n.h, s.h), blend<T>(masks[t], n.c, s.c)};
    s = n;
    bh[t] = s.h;
  }

  BiLstmOutput<T> out;
  out.annotations.reserve(steps);
  for (int t = 0; t < steps; ++t) out.annotations.push_back(concat_cols({fh[t], bh[t]}));
  std::vector<int> last(lengths.begin(), lengths.end());
  for (int& l : last) --l;
  out.final = gather_steps<T>(out.annotations, last);
  return out;
}

template <class T>
GeneralAttention<T>::GeneralAttention(ParameterStore<T>& store, const std::string& name,
                                      Eigen::Index query_dim, Eigen::Index memory_dim, Rng& rng) {
  weight_ = &store.add(name + ".weight", query_dim, memory_dim, fan_in_uniform<T>(memory_dim), rng);
}

template <class T>
Var<T> GeneralAttention<T>::keys(Graph<T>& g, Var<T> memory) const {
  return linear(memory, g.param(*weight_), Var<T>{});
}

template <class T>
AttentionResult<T> GeneralAttention<T>::attend(Graph<T>&, Var<T> query, Var<T> keys, Var<T> memory,
                                               std::span<const int> lengths,
                                               std::span<const int> src_of_row) const {
  const Var<T> w = softmax(attention_scores(query, keys, lengths, src_of_row));
  return {attention_context(w, memory, src_of_row), w};
}

template <class T>
Var<T> time_major(std::span<const Var<T>> steps) {
  return vstack(steps);
}

template class Linear<float>;
template class Linear<double>;
template class Embedding<float>;
template class Embedding<double>;
template class Lstm<float>;
template class Lstm<double>;
template class BiLstm<float>;
template class BiLstm<double>;
template class GeneralAttention<float>;
template class GeneralAttention<double>;
template Var<float> time_major<float>(std::span<const Var<float>>);
template Var<double> time_major<double>(std::span<const Var<double>>);

}  // namespace eve::nn
