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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eve/alignment.hpp"
#include "eve/checkpoint.hpp"
#include "eve/corpus.hpp"
#include "eve/numeric/layers.hpp"
#include "eve/rng.hpp"
#include "json.hpp"

namespace eve {

enum class Variant { Eve, Yin, Guu };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);

struct ModelConfig {
  int d_emb = 64;
  int d_h = 64;
  int d_z = 16;
  int src_vocab_size = 0;
  int tgt_vocab_size = 0;
  double word_dropout = 0.25;
  int beam_width = 4;
  int max_decode_len = 80;
  Variant variant = Variant::Eve;
  double guu_kappa = 30.0;
  double guu_eps = 1.0;

  void validate() const;
  /// Width of the vector that conditions the decoder.
  int rep_dim() const;
  int decoder_hidden() const { return 2 * d_h; }

  bool operator==(const ModelConfig&) const = default;
};

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

inline constexpr int kNumTagIds = 5;  // PAD + the four edit tags
int tag_id(EditTag tag);

/// Id-level, time-major view of a batch. Index as [step][row].
struct PreparedBatch {
  int rows = 0;
  std::vector<std::vector<int>> edit_tgt;
  std::vector<std::vector<int>> edit_src;
  std::vector<std::vector<int>> edit_tags;
  std::vector<int> edit_lengths;

  std::vector<std::vector<int>> doc;
  std::vector<int> doc_lengths;

  std::vector<std::vector<int>> dec_inputs;   // BOS y1 .. yN
  std::vector<std::vector<int>> dec_targets;  // y1 .. yN EOS, PAD past the end
  std::vector<int> tgt_lengths;               // N + 1 predictions per row

  std::vector<std::vector<int>> xdelta;        // changed tokens in the target vocabulary
  std::vector<std::vector<int>> guu_plus;      // target-side changed tokens
  std::vector<std::vector<int>> guu_minus;     // source-side changed tokens

  std::size_t target_tokens() const;
};

PreparedBatch prepare_batch(const Vocabulary& src_vocab, const Vocabulary& tgt_vocab,
                            std::span<const EditExample> examples,
                            std::span<const AlignedEdit> edits);

template <class T>
struct LatentPosterior {
  nn::Var<T> mu;
  nn::Var<T> log_var;
};

template <class T>
struct DocMemory {
  nn::BiLstmOutput<T> encoded;
  nn::Var<T> memory;  // time-major annotations
  nn::Var<T> keys;    // attention projection of memory
  std::vector<int> lengths;
};

/// Fixed per-row conditioning of the decoder.
template <class T>
struct DecoderCondition {
  nn::Var<T> latent;  // h'_e
  nn::LstmState<T> init;
};

template <class T>
struct DecoderStep {
  nn::LstmState<T> state;
  nn::Var<T> readout;  // [h; c_j]
  nn::Var<T> attention;
};

template <class T>
class EveModel {
 public:
  using Var = nn::Var<T>;
  using Graph = nn::Graph<T>;
  using Matrix = nn::Matrix<T>;

  EveModel(ModelConfig config, Vocabulary src_vocab, Vocabulary tgt_vocab, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const Vocabulary& src_vocab() const { return src_vocab_; }
  const Vocabulary& tgt_vocab() const { return tgt_vocab_; }
  nn::ParameterStore<T>& params() { return store_; }
  const nn::ParameterStore<T>& params() const { return store_; }

  /// h_e at each row's last edit position, rows x 2 d_h.
  Var encode_edit(Graph& g, const PreparedBatch& batch) const;
  DocMemory<T> encode_doc(Graph& g, const PreparedBatch& batch) const;
  LatentPosterior<T> infer_posterior(Graph& g, Var h_e) const;
  /// z = mu + exp(log_var / 2) * e.
  Var reparameterize(Graph& g, const LatentPosterior<T>& p, const Matrix& e) const;
  Var project_latent(Graph& g, Var rep) const;
  Var xdelta_logits(Graph& g, Var z) const;
  /// f = [P+ sum E+(x_delta+); P- sum E-(x_delta-)].
  Var guu_encode(Graph& g, const PreparedBatch& batch) const;
  /// vMF direction times a noisy truncated norm; MAP when rng is null.
  Var guu_sample(Graph& g, Var f, Rng* rng) const;

  /// Deterministic edit representation: mu, h_e or the Guu MAP vector.
  Var encode_map(Graph& g, const PreparedBatch& batch) const;

  DecoderCondition<T> condition(Graph& g, Var rep, Var doc_final) const;
  /// One decoder step. Row r attends source src_of_row[r] of the memory.
  DecoderStep<T> decoder_step(Graph& g, const DocMemory<T>& doc, const nn::LstmState<T>& state,
                              Var latent, std::span<const int> tokens,
                              std::span<const int> src_of_row) const;
  Var output_logits(Graph& g, Var readout) const;

  /// Logits for every (step, row) as a (steps * rows) x |V+| block, step-major.
  Var decode_teacher_forced(Graph& g, const DocMemory<T>& doc, Var rep,
                            const std::vector<std::vector<int>>& inputs) const;

  /// Names of generation-path parameters, reset between training stages.
  static constexpr std::string_view kDecoderPrefix = "decoder.";

 private:
  ModelConfig config_;
  Vocabulary src_vocab_;
  Vocabulary tgt_vocab_;
  nn::ParameterStore<T> store_;

  nn::Embedding<T> emb_src_;
  nn::Embedding<T> emb_tgt_;
  nn::Embedding<T> emb_tags_;
  nn::BiLstm<T> edit_encoder_;
  nn::BiLstm<T> doc_encoder_;
  nn::Linear<T> mu_;
  nn::Linear<T> log_var_;
  nn::Linear<T> xdelta_hidden_;
  nn::Linear<T> xdelta_out_;
  nn::Linear<T> guu_plus_;
  nn::Linear<T> guu_minus_;

  nn::Linear<T> bridge_;
  nn::Linear<T> latent_;
  nn::GeneralAttention<T> attention_;
  nn::Lstm<T> decoder_;
  nn::Linear<T> out_;
};

/// Samples w = cos(angle to the mean) of a vMF on the unit sphere in R^dim.
double sample_vmf_w(double kappa, int dim, Rng& rng);

/// Representation matrix for examples, in batches.
template <class T>
nn::Matrix<double> extract_representations(const EveModel<T>& model,
                                           std::span<const EditExample> examples,
                                           std::size_t batch_size = 256);

// -- persistence ------------------------------------------------------------------

template <class T>
CheckpointFile model_checkpoint(const EveModel<T>& model);

template <class T>
EveModel<T> model_from_checkpoint(const CheckpointFile& file);

template <class T>
void load_parameters(EveModel<T>& model, const CheckpointFile& file);

}  // namespace eve
