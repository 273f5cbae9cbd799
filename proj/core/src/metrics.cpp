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

#include "eve/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "eve/error.hpp"
#include "eve/training.hpp"

namespace eve {

NGramCounts ngram_counts(std::span<const Token> tokens, int n) {
  NGramCounts counts;
  const auto len = static_cast<int>(tokens.size());
  for (int i = 0; i + n <= len; ++i) ++counts[NGram(tokens.begin() + i, tokens.begin() + i + n)];
  return counts;
}

NGramStats& NGramStats::operator+=(const NGramStats& o) {
  for (int n = 0; n < 4; ++n) {
    matches[n] += o.matches[n];
    totals[n] += o.totals[n];
  }
  hyp_len += o.hyp_len;
  ref_len += o.ref_len;
  return *this;
}

namespace {

int overlap(const NGramCounts& a, const NGramCounts& b) {
  int s = 0;
  for (const auto& [g, c] : a)
    if (auto it = b.find(g); it != b.end()) s += std::min(c, it->second);
  return s;
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw DimensionError(std::string(what) + ": list lengths differ (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
}

}  // namespace

NGramStats bleu_stats(std::span<const Token> hyp, std::span<const Token> ref) {
  NGramStats s;
  s.hyp_len = static_cast<double>(hyp.size());
  s.ref_len = static_cast<double>(ref.size());
  for (int n = 1; n <= 4; ++n) {
    s.matches[n - 1] = overlap(ngram_counts(hyp, n), ngram_counts(ref, n));
    s.totals[n - 1] = std::max(0, static_cast<int>(hyp.size()) - n + 1);
  }
  return s;
}

NGramStats gleu_stats(std::span<const Token> src, std::span<const Token> hyp,
                      std::span<const Token> ref) {
  NGramStats s;
  s.hyp_len = static_cast<double>(hyp.size());
  s.ref_len = static_cast<double>(ref.size());
  for (int n = 1; n <= 4; ++n) {
    const NGramCounts h = ngram_counts(hyp, n), r = ngram_counts(ref, n);
    NGramCounts src_only = ngram_counts(src, n);
    for (auto it = src_only.begin(); it != src_only.end();)
      it = r.count(it->first) ? src_only.erase(it) : std::next(it);
    s.matches[n - 1] = std::max(0, overlap(h, r) - overlap(h, src_only));
    s.totals[n - 1] = std::max(0, static_cast<int>(hyp.size()) - n + 1);
  }
  return s;
}

double score_from_stats(const NGramStats& s, bool smooth) {
  if (s.hyp_len == 0.0) return 0.0;
  double log_p = 0.0;
  for (int n = 0; n < 4; ++n) {
    double m = s.matches[n], t = s.totals[n];
    if (smooth && n >= 1) {
      m += 1.0;
      t += 1.0;
    }
    if (m == 0.0 || t == 0.0) return 0.0;
    log_p += std::log(m / t);
  }
  const double bp = std::min(0.0, 1.0 - s.ref_len / s.hyp_len);
  return std::exp(bp + log_p / 4.0);
}

double bleu4(std::span<const TokenSeq> hyps, std::span<const TokenSeq> refs) {
  require_same_size(hyps.size(), refs.size(), "bleu4");
  NGramStats total;
  for (std::size_t i = 0; i < hyps.size(); ++i) total += bleu_stats(hyps[i], refs[i]);
  return score_from_stats(total, false);
}

double gleu(std::span<const TokenSeq> srcs, std::span<const TokenSeq> hyps,
            std::span<const TokenSeq> refs) {
  require_same_size(srcs.size(), hyps.size(), "gleu");
  require_same_size(hyps.size(), refs.size(), "gleu");
  NGramStats total;
  for (std::size_t i = 0; i < hyps.size(); ++i) total += gleu_stats(srcs[i], hyps[i], refs[i]);
  return score_from_stats(total, false);
}

double sentence_bleu(std::span<const Token> hyp, std::span<const Token> ref) {
  return score_from_stats(bleu_stats(hyp, ref), true);
}

double sentence_gleu(std::span<const Token> src, std::span<const Token> hyp,
                     std::span<const Token> ref) {
  return score_from_stats(gleu_stats(src, hyp, ref), true);
}

double token_accuracy(std::span<const Token> hyp, std::span<const Token> ref) {
  const std::size_t len = std::max(hyp.size(), ref.size());
  if (len == 0) return 1.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(hyp.size(), ref.size()); ++i) hits += hyp[i] == ref[i];
  return static_cast<double>(hits) / static_cast<double>(len);
}

double mean_token_accuracy(std::span<const TokenSeq> hyps, std::span<const TokenSeq> refs) {
  require_same_size(hyps.size(), refs.size(), "token_accuracy");
  if (hyps.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) s += token_accuracy(hyps[i], refs[i]);
  return s / static_cast<double>(hyps.size());
}

template <class T>
double cross_entropy(const EveModel<T>& model, std::span<const EditExample> examples,
                     std::size_t batch_size) {
  const std::vector<AlignedEdit> edits = align_all(examples);
  double nll = 0.0;
  std::size_t tokens = 0;
  const LossOptions opts{0.0, 0.0, nullptr};
  for (std::size_t start = 0; start < examples.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, examples.size() - start);
    const PreparedBatch b =
        prepare_batch(model.src_vocab(), model.tgt_vocab(), examples.subspan(start, n),
                      std::span<const AlignedEdit>(edits).subspan(start, n));
    nn::Graph<T> g(false);
    const LossTerms<T> terms = compute_loss(model, g, b, opts);
    nll += static_cast<double>(terms.recon.item()) * static_cast<double>(n);
    tokens += terms.target_tokens;
  }
  return tokens == 0 ? 0.0 : nll / static_cast<double>(tokens);
}

nlohmann::json ScoreReport::to_json() const {
  nlohmann::json j = {{"bleu", bleu},
                      {"gleu", gleu},
                      {"token_accuracy", token_accuracy},
                      {"size", size},
                      {"bleu_level", "corpus"}};
  if (cross_entropy) j["cross_entropy"] = *cross_entropy;
  return j;
}

ScoreReport score_corpus(std::span<const TokenSeq> srcs, std::span<const TokenSeq> hyps,
                         std::span<const TokenSeq> refs) {
  ScoreReport r;
  r.bleu = bleu4(hyps, refs);
  r.gleu = gleu(srcs, hyps, refs);
  r.token_accuracy = mean_token_accuracy(hyps, refs);
  r.size = hyps.size();
  return r;
}

template double cross_entropy<float>(const EveModel<float>&, std::span<const EditExample>,
                                     std::size_t);
template double cross_entropy<double>(const EveModel<double>&, std::span<const EditExample>,
                                      std::size_t);

}  // namespace eve
