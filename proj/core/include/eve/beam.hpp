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
#include <vector>

#include <Eigen/Core>

#include "eve/corpus.hpp"
#include "eve/model.hpp"

namespace eve {

/// Next-token log-probabilities for a set of live hypotheses.
class BeamScorer {
 public:
  virtual ~BeamScorer() = default;
  /// Scores of the single root hypothesis (rows x vocab with one row).
  virtual Eigen::MatrixXd start() = 0;
  /// Row i extends previous row parents[i] with tokens[i].
  virtual Eigen::MatrixXd advance(std::span<const int> parents, std::span<const int> tokens) = 0;
};

struct BeamResult {
  std::vector<int> tokens;  // without the end token
  double log_prob = 0.0;    // includes the end token when finished
  double score = 0.0;       // log_prob / length
  bool finished = false;
};

/// Length-normalised beam search. Finished hypotheses leave the beam, which
/// shrinks accordingly. Output never exceeds max_len tokens.
BeamResult beam_search(BeamScorer& scorer, int beam_width, int max_len, int eos);

BeamResult greedy_search(BeamScorer& scorer, int max_len, int eos);

/// Scorer over one example for a frozen model.
template <class T>
class ModelScorer : public BeamScorer {
 public:
  ModelScorer(const EveModel<T>& model, const PreparedBatch& single);

  Eigen::MatrixXd start() override;
  Eigen::MatrixXd advance(std::span<const int> parents, std::span<const int> tokens) override;

 private:
  Eigen::MatrixXd emit(const DecoderStep<T>& step);

  const EveModel<T>& model_;
  nn::Graph<T> graph_{false};
  DocMemory<T> doc_;
  DecoderCondition<T> cond_;
  nn::Matrix<T> h_;
  nn::Matrix<T> c_;
};

struct Generation {
  TokenSeq tokens;
  double log_prob = 0.0;
  bool finished = false;
};

/// Beam-decodes every example with its MAP edit representation.
template <class T>
std::vector<Generation> generate(const EveModel<T>& model, std::span<const EditExample> examples,
                                 int beam_width, int max_len);

}  // namespace eve
