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

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eve/corpus.hpp"
#include "eve/model.hpp"
#include "json.hpp"

namespace eve {

using NGram = std::vector<std::string>;
using NGramCounts = std::map<NGram, int>;

/// Counts of all n-grams of one order.
NGramCounts ngram_counts(std::span<const Token> tokens, int n);

/// Sufficient statistics shared by BLEU and GLEU.
struct NGramStats {
  std::array<double, 4> matches{};
  std::array<double, 4> totals{};
  double hyp_len = 0.0;
  double ref_len = 0.0;

  NGramStats& operator+=(const NGramStats& o);
};

NGramStats bleu_stats(std::span<const Token> hyp, std::span<const Token> ref);
/// Matches are clipped hyp/ref matches minus hyp matches with source n-grams
/// that never occur in the reference, floored at 0 per sentence.
NGramStats gleu_stats(std::span<const Token> src, std::span<const Token> hyp,
                      std::span<const Token> ref);

/// Geometric mean with brevity penalty; 0 if any precision is 0.
/// With smoothing, orders n >= 2 use (m + 1) / (t + 1).
double score_from_stats(const NGramStats& stats, bool smooth);

double bleu4(std::span<const TokenSeq> hyps, std::span<const TokenSeq> refs);
double gleu(std::span<const TokenSeq> srcs, std::span<const TokenSeq> hyps,
            std::span<const TokenSeq> refs);
double sentence_bleu(std::span<const Token> hyp, std::span<const Token> ref);
double sentence_gleu(std::span<const Token> src, std::span<const Token> hyp,
                     std::span<const Token> ref);

/// Positional matches / max(|hyp|, |ref|); 1 when both are empty.
double token_accuracy(std::span<const Token> hyp, std::span<const Token> ref);
double mean_token_accuracy(std::span<const TokenSeq> hyps, std::span<const TokenSeq> refs);

/// Teacher-forced mean NLL per target token (EOS included), e = 0.
template <class T>
double cross_entropy(const EveModel<T>& model, std::span<const EditExample> examples,
                     std::size_t batch_size = 64);

struct ScoreReport {
  double bleu = 0.0;
  double gleu = 0.0;
  double token_accuracy = 0.0;
  std::optional<double> cross_entropy;
  std::size_t size = 0;

  nlohmann::json to_json() const;
};

ScoreReport score_corpus(std::span<const TokenSeq> srcs, std::span<const TokenSeq> hyps,
                         std::span<const TokenSeq> refs);

}  // namespace eve
