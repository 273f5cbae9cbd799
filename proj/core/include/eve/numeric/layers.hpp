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

#include <span>
#include <string>
#include <vector>

#include "eve/numeric/graph.hpp"

namespace eve::nn {

/// y = x Wᵀ + b, with W of shape (out, in).
template <class T>
class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore<T>& store, const std::string& name, Eigen::Index in, Eigen::Index out,
         Rng& rng, bool bias = true);

  Var<T> operator()(Graph<T>& g, Var<T> x) const;

  Parameter<T>& weight() const { return *weight_; }
  Parameter<T>* bias() const { return bias_; }
  Eigen::Index in() const { return weight_->value.cols(); }
  Eigen::Index out() const { return weight_->value.rows(); }

 private:
  Parameter<T>* weight_ = nullptr;
  Parameter<T>* bias_ = nullptr;
};

template <class T>
class Embedding {
 public:
  Embedding() = default;
  Embedding(ParameterStore<T>& store, const std::string& name, Eigen::Index vocab,
            Eigen::Index dim, Rng& rng);

  Var<T> operator()(Graph<T>& g, std::span<const int> ids) const;

  Parameter<T>& table() const { return *table_; }
  Eigen::Index dim() const { return table_->value.cols(); }
  Eigen::Index vocab() const { return table_->value.rows(); }

 private:
  Parameter<T>* table_ = nullptr;
};

template <class T>
struct LstmState {
  Var<T> h;
  Var<T> c;
};

/// Gate order i, f, g, o over a single fused weight on [x; h].
template <class T>
class Lstm {
 public:
  Lstm() = default;
  Lstm(ParameterStore<T>& store, const std::string& name, Eigen::Index input, Eigen::Index hidden,
       Rng& rng);

  LstmState<T> zero_state(Graph<T>& g, Eigen::Index rows) const;
  LstmState<T> step(Graph<T>& g, const LstmState<T>& state, Var<T> x) const;

  Eigen::Index input_size() const { return input_; }
  Eigen::Index hidden_size() const { return hidden_; }
  Parameter<T>& weight() const { return *weight_; }
  Parameter<T>& bias() const { return *bias_; }

 private:
  Parameter<T>* weight_ = nullptr;
  Parameter<T>* bias_ = nullptr;
  Eigen::Index input_ = 0;
  Eigen::Index hidden_ = 0;
};

template <class T>
struct BiLstmOutput {
  /// One (rows x 2H) node per time step.
  std::vector<Var<T>> annotations;
  /// Annotation at each row's last real position.
  Var<T> final;
};

/// Bidirectional LSTM over a padded batch. Row r is valid for t < lengths[r].
template <class T>
class BiLstm {
 public:
  BiLstm() = default;
  BiLstm(ParameterStore<T>& store, const std::string& name, Eigen::Index input,
         Eigen::Index hidden, Rng& rng);

  BiLstmOutput<T> encode(Graph<T>& g, std::span<const Var<T>> inputs,
                         std::span<const int> lengths) const;

  const Lstm<T>& forward() const { return fwd_; }
  const Lstm<T>& backward() const { return bwd_; }
  Eigen::Index hidden_size() const { return fwd_.hidden_size(); }

 private:
  Lstm<T> fwd_;
  Lstm<T> bwd_;
};

template <class T>
struct AttentionResult {
  Var<T> context;
  Var<T> weights;
};

/// score_t = qᵀ W a_t over time-major memory rows (t * sources + s).
template <class T>
class GeneralAttention {
 public:
  GeneralAttention() = default;
  GeneralAttention(ParameterStore<T>& store, const std::string& name, Eigen::Index query_dim,
                   Eigen::Index memory_dim, Rng& rng);

  /// W a_t for all memory rows; compute once per batch.
  Var<T> keys(Graph<T>& g, Var<T> memory) const;
  AttentionResult<T> attend(Graph<T>& g, Var<T> query, Var<T> keys, Var<T> memory,
                            std::span<const int> lengths, std::span<const int> src_of_row) const;

  Parameter<T>& weight() const { return *weight_; }

 private:
  Parameter<T>* weight_ = nullptr;
};

/// Stacks per-step nodes into a time-major (T * rows) x d memory.
template <class T>
Var<T> time_major(std::span<const Var<T>> steps);

}  // namespace eve::nn
