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

#include "eve/beam.hpp"

#include <algorithm>
#include <numeric>

#include "eve/error.hpp"

namespace eve {

namespace {

struct Hypothesis {
  std::vector<int> tokens;
  double log_prob = 0.0;
};

struct Candidate {
  double log_prob;
  int parent;
  int token;
};

double normalized(double log_prob, std::size_t length) {
  return length == 0 ? log_prob : log_prob / static_cast<double>(length);
}

}  // namespace

BeamResult beam_search(BeamScorer& scorer, int beam_width, int max_len, int eos) {
  if (beam_width < 1) throw Error("beam_width must be >= 1");
  if (max_len < 1) throw Error("max_len must be >= 1");
  std::vector<Hypothesis> live(1);
  std::vector<BeamResult> finished;
  Eigen::MatrixXd scores = scorer.start();

  for (int step = 1; step <= max_len; ++step) {
    const int room = beam_width - static_cast<int>(finished.size());
    std::vector<Candidate> cands;
    cands.reserve(static_cast<std::size_t>(scores.size()));
    for (int i = 0; i < static_cast<int>(live.size()); ++i)
      for (int v = 0; v < scores.cols(); ++v)
        cands.push_back({live[i].log_prob + scores(i, v), i, v});
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(room), cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(take), cands.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.token < b.token;
                      });

    std::vector<Hypothesis> next;
    std::vector<int> parents, tokens;
    for (std::size_t k = 0; k < take; ++k) {
      const Candidate& c = cands[k];
      std::vector<int> seq = live[c.parent].tokens;
      if (c.token == eos) {
        BeamResult r;
        r.log_prob = c.log_prob;
        r.score = normalized(c.log_prob, seq.size() + 1);
        r.tokens = std::move(seq);
        r.finished = true;
        finished.push_back(std::move(r));
      } else {
        seq.push_back(c.token);
        next.push_back({std::move(seq), c.log_prob});
        parents.push_back(c.parent);
        tokens.push_back(c.token);
      }
    }
    live = std::move(next);
    if (live.empty() || static_cast<int>(finished.size()) >= beam_width || step == max_len) break;
    scores = scorer.advance(parents, tokens);
  }

  auto better = [](const BeamResult& a, const BeamResult& b) { return a.score > b.score; };
  if (!finished.empty()) {
    return *std::min_element(finished.begin(), finished.end(),
                             [&](const BeamResult& a, const BeamResult& b) { return better(a, b); });
  }
  BeamResult best;
  bool have = false;
  for (Hypothesis& h : live) {
    BeamResult r;
    r.score = normalized(h.log_prob, h.tokens.size());
    r.log_prob = h.log_prob;
    r.tokens = std::move(h.tokens);
    if (!have || better(r, best)) {
      best = std::move(r);
      have = true;
    }
  }
  return best;
}

BeamResult greedy_search(BeamScorer& scorer, int max_len, int eos) {
  if (max_len < 1) throw Error("max_len must be >= 1");
  BeamResult r;
  Eigen::MatrixXd scores = scorer.start();
  for (int step = 1; step <= max_len; ++step) {
    Eigen::Index best = 0;
    scores.row(0).maxCoeff(&best);
    r.log_prob += scores(0, best);
    if (static_cast<int>(best) == eos) {
      r.finished = true;
      break;
    }
    r.tokens.push_back(static_cast<int>(best));
    if (step == max_len) break;
    const int parent = 0, token = static_cast<int>(best);
    scores = scorer.advance(std::span<const int>(&parent, 1), std::span<const int>(&token, 1));
  }
  r.score = normalized(r.log_prob, r.tokens.size() + (r.finished ? 1 : 0));
  return r;
}

// -- model scorer -----------------------------------------------------------------

template <class T>
ModelScorer<T>::ModelScorer(const EveModel<T>& model, const PreparedBatch& single) : model_(model) {
  if (single.rows != 1) throw DimensionError("ModelScorer: expects a single example");
  doc_ = model.encode_doc(graph_, single);
  const nn::Var<T> rep = model.encode_map(graph_, single);
  cond_ = model.condition(graph_, rep, doc_.encoded.final);
}

template <class T>
Eigen::MatrixXd ModelScorer<T>::emit(const DecoderStep<T>& step) {
  h_ = step.state.h.value();
  c_ = step.state.c.value();
  const nn::Var<T> logp = nn::log_softmax(model_.output_logits(graph_, step.readout));
  return logp.value().template cast<double>();
}

template <class T>
Eigen::MatrixXd ModelScorer<T>::start() {
  const int bos = Vocabulary::kBos, src = 0;
  return emit(model_.decoder_step(graph_, doc_, cond_.init, cond_.latent,
                                  std::span<const int>(&bos, 1), std::span<const int>(&src, 1)));
}

template <class T>
Eigen::MatrixXd ModelScorer<T>::advance(std::span<const int> parents, std::span<const int> tokens) {
  if (parents.size() != tokens.size() || parents.empty())
    throw DimensionError("ModelScorer: parents/tokens mismatch");
  const auto rows = static_cast<Eigen::Index>(parents.size());
  nn::Matrix<T> h(rows, h_.cols()), c(rows, c_.cols()), lat(rows, cond_.latent.cols());
  for (Eigen::Index r = 0; r < rows; ++r) {
    h.row(r) = h_.row(parents[static_cast<std::size_t>(r)]);
    c.row(r) = c_.row(parents[static_cast<std::size_t>(r)]);
    lat.row(r) = cond_.latent.value().row(0);
  }
  const std::vector<int> src(static_cast<std::size_t>(rows), 0);
  const nn::LstmState<T> state{graph_.constant(std::move(h)), graph_.constant(std::move(c))};
  return emit(model_.decoder_step(graph_, doc_, state, graph_.constant(std::move(lat)), tokens, src));
}

template <class T>
std::vector<Generation> generate(const EveModel<T>& model, std::span<const EditExample> examples,
                                 int beam_width, int max_len) {
  std::vector<Generation> out;
  out.reserve(examples.size());
  for (const EditExample& ex : examples) {
    const AlignedEdit edit = align(ex.src, ex.tgt);
    const PreparedBatch b = prepare_batch(model.src_vocab(), model.tgt_vocab(),
                                          std::span<const EditExample>(&ex, 1),
                                          std::span<const AlignedEdit>(&edit, 1));
    ModelScorer<T> scorer(model, b);
    const BeamResult r = beam_search(scorer, beam_width, max_len, Vocabulary::kEos);
    out.push_back({model.tgt_vocab().decode(r.tokens), r.log_prob, r.finished});
  }
  return out;
}

template class ModelScorer<float>;
template class ModelScorer<double>;
template std::vector<Generation> generate<float>(const EveModel<float>&,
                                                 std::span<const EditExample>, int, int);
template std::vector<Generation> generate<double>(const EveModel<double>&,
                                                  std::span<const EditExample>, int, int);

}  // namespace eve
