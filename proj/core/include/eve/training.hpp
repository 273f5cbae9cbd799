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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "eve/model.hpp"
#include "eve/numeric/optim.hpp"
#include "json.hpp"

namespace eve {

/// -1/2 sum(1 + log_var - mu^2 - exp(log_var)).
double kl_gaussian(std::span<const double> mu, std::span<const double> log_var);

/// -sum_t log_softmax(f)[x_t]; 0 for an empty bag.
double xdelta_loss(std::span<const double> logits, std::span<const int> x_delta);

struct AnnealSchedule {
  double midpoint = 0.0;  // x0
  double steepness = 0.0025;  // k
};

/// 1 / (1 + exp(-k (step - x0))).
double kl_weight(double step, const AnnealSchedule& schedule);

/// Replaces each token other than BOS/EOS/PAD with UNK with probability rate.
void word_dropout(std::span<int> tokens, double rate, Rng& rng);

/// Re-initialises every generation-path parameter; the rest is untouched.
template <class T>
void reset_decoder(EveModel<T>& model, Rng& rng);

struct LossBreakdown {
  double recon_nll = 0.0;
  double kl = 0.0;
  double xdelta_nll = 0.0;
  double kl_weight = 0.0;
  double xdelta_weight = 0.0;
  double total = 0.0;
  bool has_kl = false;
  bool has_xdelta = false;

  nlohmann::json to_json() const;
};

struct LossOptions {
  double beta = 0.0;
  double lambda = 1.0;
  /// Noise source for z; null means e = 0 (and the Guu MAP vector).
  Rng* noise = nullptr;
};

template <class T>
struct LossTerms {
  nn::Var<T> total;
  nn::Var<T> recon;
  nn::Var<T> kl;      // invalid for variants without a Gaussian posterior
  nn::Var<T> xdelta;  // invalid when not part of the objective
  std::size_t target_tokens = 0;

  LossBreakdown breakdown(const LossOptions& options) const;
};

/// Batch-mean KL of a diagonal Gaussian posterior against N(0, I).
template <class T>
nn::Var<T> kl_term(nn::Graph<T>& g, const LatentPosterior<T>& p);

/// recon + beta * kl + lambda * x_delta, each a mean over the batch.
template <class T>
LossTerms<T> compute_loss(const EveModel<T>& model, nn::Graph<T>& g, const PreparedBatch& batch,
                          const LossOptions& options);

struct TrainConfig {
  std::uint64_t seed = 1;
  std::size_t batch_size = 64;
  bool bucket_by_length = true;
  double lr = 1e-3;
  /// Per-epoch learning-rate factor within a stage: lr * lr_decay^epoch.
  double lr_decay = 1.0;
  double clip_norm = 5.0;
  bool two_stage = true;
  bool use_kl = true;
  double xdelta_weight = 1.0;
  int pretrain_max_epochs = 20;
  int epochs = 10;
  int single_stage_max_epochs = 20;
  int patience = 3;
  double anneal_k = 0.0025;
  double anneal_x0 = -1.0;  // negative: half of the planned stage-B steps

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);

struct TrainOptions {
  std::filesystem::path out_dir;
  bool resume = false;
  /// Stop after this many epochs in this invocation (simulates interruption).
  int halt_after_epochs = -1;
  std::ostream* log = nullptr;
  /// Free-form label recorded in the report, e.g. "Base".
  std::string label;
  /// Merged into the metadata of every checkpoint written.
  nlohmann::json extra_meta = nlohmann::json::object();
};

/// Mean loss over a data set, no dropout, e = 0.
template <class T>
LossBreakdown evaluate_loss(const EveModel<T>& model, std::span<const EditExample> examples,
                            std::span<const AlignedEdit> edits, const LossOptions& options,
                            std::size_t batch_size = 64);

/// Runs the configured schedule and leaves the best checkpoint in the model.
/// Writes best.ckpt, last.ckpt and report.json to options.out_dir.
template <class T>
nlohmann::json train(EveModel<T>& model, std::span<const EditExample> train_set,
                     std::span<const EditExample> valid_set, const TrainConfig& config,
                     const TrainOptions& options);

}  // namespace eve
