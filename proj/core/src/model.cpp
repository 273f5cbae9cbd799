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

#include "eve/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "eve/error.hpp"

namespace eve {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::Eve: return "EVE";
    case Variant::Yin: return "YIN";
    case Variant::Guu: return "GUU";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up == "EVE") return Variant::Eve;
  if (up == "YIN") return Variant::Yin;
  if (up == "GUU") return Variant::Guu;
  throw Error("unknown variant " + std::string(name) + " (expected EVE, YIN or GUU)");
}

void ModelConfig::validate() const {
  if (d_emb < 1 || d_h < 1 || d_z < 1) throw Error("model dimensions must be positive");
  if (src_vocab_size < Vocabulary::kNumReserved || tgt_vocab_size < Vocabulary::kNumReserved)
    throw Error("vocabulary sizes must include the reserved tokens");
  if (!(word_dropout >= 0.0 && word_dropout <= 1.0)) throw Error("word_dropout must be in [0, 1]");
  if (beam_width < 1) throw Error("beam_width must be >= 1");
  if (max_decode_len < 1) throw Error("max_decode_len must be >= 1");
  if (!(guu_kappa > 0.0)) throw Error("guu_kappa must be > 0");
  if (!(guu_eps > 0.0 && guu_eps < 10.0)) throw Error("guu_eps must be in (0, 10)");
}

int ModelConfig::rep_dim() const {
  switch (variant) {
    case Variant::Eve: return d_z;
    case Variant::Yin: return 2 * d_h;
    case Variant::Guu: return 2 * d_z;
  }
  return d_z;
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"d_emb", c.d_emb},
          {"d_h", c.d_h},
          {"d_z", c.d_z},
          {"src_vocab_size", c.src_vocab_size},
          {"tgt_vocab_size", c.tgt_vocab_size},
          {"word_dropout", c.word_dropout},
          {"beam_width", c.beam_width},
          {"max_decode_len", c.max_decode_len},
          {"variant", std::string(variant_name(c.variant))},
          {"guu_kappa", c.guu_kappa},
          {"guu_eps", c.guu_eps}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.d_emb = j.at("d_emb").get<int>();
    c.d_h = j.at("d_h").get<int>();
    c.d_z = j.at("d_z").get<int>();
    c.src_vocab_size = j.at("src_vocab_size").get<int>();
    c.tgt_vocab_size = j.at("tgt_vocab_size").get<int>();
    c.word_dropout = j.at("word_dropout").get<double>();
    c.beam_width = j.at("beam_width").get<int>();
    c.max_decode_len = j.at("max_decode_len").get<int>();
    c.variant = parse_variant(j.at("variant").get<std::string>());
    c.guu_kappa = j.at("guu_kappa").get<double>();
    c.guu_eps = j.at("guu_eps").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad model config: ") + e.what());
  }
  return c;
}

int tag_id(EditTag tag) { return 1 + static_cast<int>(tag); }

std::size_t PreparedBatch::target_tokens() const {
  return std::accumulate(tgt_lengths.begin(), tgt_lengths.end(), std::size_t{0});
}

PreparedBatch prepare_batch(const Vocabulary& src_vocab, const Vocabulary& tgt_vocab,
                            std::span<const EditExample> examples,
                            std::span<const AlignedEdit> edits) {
  if (examples.size() != edits.size()) throw DimensionError("prepare_batch: size mismatch");
  if (examples.empty()) throw DimensionError("prepare_batch: empty batch");
  PreparedBatch b;
  b.rows = static_cast<int>(examples.size());
  std::size_t max_m = 0, max_src = 0, max_tgt = 0;
  for (std::size_t r = 0; r < examples.size(); ++r) {
    if (edits[r].length() == 0) throw DimensionError("prepare_batch: empty edit");
    if (examples[r].src.empty()) throw DimensionError("prepare_batch: empty source");
    max_m = std::max(max_m, edits[r].length());
    max_src = std::max(max_src, examples[r].src.size());
    max_tgt = std::max(max_tgt, examples[r].tgt.size());
  }
  const auto rows = static_cast<std::size_t>(b.rows);
  auto grid = [rows](std::size_t steps) {
    return std::vector<std::vector<int>>(steps, std::vector<int>(rows, Vocabulary::kPad));
  };
  b.edit_tgt = grid(max_m);
  b.edit_src = grid(max_m);
  b.edit_tags = grid(max_m);
  b.doc = grid(max_src);
  b.dec_inputs = grid(max_tgt + 1);
  b.dec_targets = grid(max_tgt + 1);
  b.xdelta.resize(rows);
  b.guu_plus.resize(rows);
  b.guu_minus.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const AlignedEdit& e = edits[r];
    const EditExample& ex = examples[r];
    for (std::size_t t = 0; t < e.length(); ++t) {
      b.edit_tgt[t][r] = tgt_vocab.id(e.tgt_padded[t]);
      b.edit_src[t][r] = src_vocab.id(e.src_padded[t]);
      b.edit_tags[t][r] = tag_id(e.tags[t]);
      switch (e.tags[t]) {
        case EditTag::Equal: break;
        case EditTag::Insert: b.guu_plus[r].push_back(tgt_vocab.id(e.tgt_padded[t])); break;
        case EditTag::Delete: b.guu_minus[r].push_back(src_vocab.id(e.src_padded[t])); break;
        case EditTag::Replace:
          b.guu_plus[r].push_back(tgt_vocab.id(e.tgt_padded[t]));
          b.guu_minus[r].push_back(src_vocab.id(e.src_padded[t]));
          break;
      }
    }
    b.edit_lengths.push_back(static_cast<int>(e.length()));
    for (std::size_t t = 0; t < ex.src.size(); ++t) b.doc[t][r] = src_vocab.id(ex.src[t]);
    b.doc_lengths.push_back(static_cast<int>(ex.src.size()));
    b.dec_inputs[0][r] = Vocabulary::kBos;
    for (std::size_t t = 0; t < ex.tgt.size(); ++t) {
      const int id = tgt_vocab.id(ex.tgt[t]);
      b.dec_inputs[t + 1][r] = id;
      b.dec_targets[t][r] = id;
    }
    b.dec_targets[ex.tgt.size()][r] = Vocabulary::kEos;
    b.tgt_lengths.push_back(static_cast<int>(ex.tgt.size() + 1));
    for (const Token& tok : changed_tokens(e)) b.xdelta[r].push_back(tgt_vocab.id(tok));
  }
  return b;
}

// -- model ------------------------------------------------------------------------

template <class T>
EveModel<T>::EveModel(ModelConfig config, Vocabulary src_vocab, Vocabulary tgt_vocab,
                      std::uint64_t seed)
    : config_(config), src_vocab_(std::move(src_vocab)), tgt_vocab_(std::move(tgt_vocab)) {
  config_.src_vocab_size = src_vocab_.size();
  config_.tgt_vocab_size = tgt_vocab_.size();
  config_.validate();
  Rng rng = Rng(seed).derive("init");
  const ModelConfig& c = config_;
  const Eigen::Index e = c.d_emb, h = c.d_h, z = c.d_z, dh = c.decoder_hidden();
  const Eigen::Index rep = c.rep_dim();

  emb_src_ = nn::Embedding<T>(store_, "embed.src", c.src_vocab_size, e, rng);
  emb_tgt_ = nn::Embedding<T>(store_, "embed.tgt", c.tgt_vocab_size, e, rng);
  if (c.variant != Variant::Guu) {
    emb_tags_ = nn::Embedding<T>(store_, "embed.tags", kNumTagIds, e, rng);
    edit_encoder_ = nn::BiLstm<T>(store_, "encoder.edit", 3 * e, h, rng);
  }
  doc_encoder_ = nn::BiLstm<T>(store_, "encoder.doc", e, h, rng);
  if (c.variant == Variant::Eve) {
    mu_ = nn::Linear<T>(store_, "inferer.mu", 2 * h, z, rng);
    log_var_ = nn::Linear<T>(store_, "inferer.log_var", 2 * h, z, rng);
    xdelta_hidden_ = nn::Linear<T>(store_, "xdelta.hidden", z, z, rng);
    xdelta_out_ = nn::Linear<T>(store_, "xdelta.out", z, c.tgt_vocab_size, rng);
  }
  if (c.variant == Variant::Guu) {
    guu_plus_ = nn::Linear<T>(store_, "guu.proj_plus", e, z, rng, false);
    guu_minus_ = nn::Linear<T>(store_, "guu.proj_minus", e, z, rng, false);
  }
  bridge_ = nn::Linear<T>(store_, "decoder.bridge", rep + 2 * h, 2 * dh, rng);
  latent_ = nn::Linear<T>(store_, "decoder.latent", rep, h, rng);
  attention_ = nn::GeneralAttention<T>(store_, "decoder.attention", dh, 2 * h, rng);
  decoder_ = nn::Lstm<T>(store_, "decoder.lstm", e + h + 2 * h, dh, rng);
  out_ = nn::Linear<T>(store_, "decoder.out", dh + 2 * h, c.tgt_vocab_size, rng);
}

template <class T>
typename EveModel<T>::Var EveModel<T>::encode_edit(Graph& g, const PreparedBatch& b) const {
  if (config_.variant == Variant::Guu) throw Error("encode_edit: the GUU variant has no edit encoder");
  if (b.edit_tgt.empty()) throw DimensionError("encode_edit: M = 0");
  std::vector<Var> inputs;
  inputs.reserve(b.edit_tgt.size());
  for (std::size_t t = 0; t < b.edit_tgt.size(); ++t)
    inputs.push_back(nn::concat_cols<T>(
        {emb_tgt_(g, b.edit_tgt[t]), emb_src_(g, b.edit_src[t]), emb_tags_(g, b.edit_tags[t])}));
  return edit_encoder_.encode(g, inputs, b.edit_lengths).final;
}

template <class T>
DocMemory<T> EveModel<T>::encode_doc(Graph& g, const PreparedBatch& b) const {
  if (b.doc.empty()) throw DimensionError("encode_doc: empty source");
  std::vector<Var> inputs;
  inputs.reserve(b.doc.size());
  for (const auto& ids : b.doc) inputs.push_back(emb_src_(g, ids));
  DocMemory<T> m;
  m.encoded = doc_encoder_.encode(g, inputs, b.doc_lengths);
  m.memory = nn::time_major<T>(m.encoded.annotations);
  m.keys = attention_.keys(g, m.memory);
  m.lengths = b.doc_lengths;
  return m;
}

template <class T>
LatentPosterior<T> EveModel<T>::infer_posterior(Graph& g, Var h_e) const {
  if (config_.variant != Variant::Eve) throw Error("infer_posterior: only the EVE variant has an inferer");
  if (h_e.cols() != 2 * config_.d_h) throw DimensionError("infer_posterior: h_e width");
  return {mu_(g, h_e), nn::clamp<T>(log_var_(g, h_e), T(-10), T(10))};
}

template <class T>
typename EveModel<T>::Var EveModel<T>::reparameterize(Graph& g, const LatentPosterior<T>& p,
                                                      const Matrix& e) const {
  if (e.rows() != p.mu.rows() || e.cols() != p.mu.cols())
    throw DimensionError("reparameterize: noise shape");
  const Var sigma = nn::exp(nn::scale(p.log_var, T(0.5)));
  return nn::add(p.mu, nn::mul(sigma, g.constant(e)));
}

template <class T>
typename EveModel<T>::Var EveModel<T>::project_latent(Graph& g, Var rep) const {
  return latent_(g, rep);
}

template <class T>
typename EveModel<T>::Var EveModel<T>::xdelta_logits(Graph& g, Var z) const {
  if (config_.variant != Variant::Eve) throw Error("xdelta_logits: only the EVE variant has an x_delta head");
  return xdelta_out_(g, nn::tanh(xdelta_hidden_(g, z)));
}

namespace {

template <class T>
nn::Matrix<T> bag_counts(const std::vector<std::vector<int>>& bags, int vocab) {
  nn::Matrix<T> c = nn::Matrix<T>::Zero(static_cast<Eigen::Index>(bags.size()), vocab);
  for (std::size_t r = 0; r < bags.size(); ++r)
    for (int id : bags[r]) c(static_cast<Eigen::Index>(r), id) += T(1);
  return c;
}

}  // namespace

template <class T>
typename EveModel<T>::Var EveModel<T>::guu_encode(Graph& g, const PreparedBatch& b) const {
  if (config_.variant != Variant::Guu) throw Error("guu_encode: not a GUU model");
  const Var plus = nn::matmul(g.constant(bag_counts<T>(b.guu_plus, config_.tgt_vocab_size)),
                              g.param(emb_tgt_.table()));
  const Var minus = nn::matmul(g.constant(bag_counts<T>(b.guu_minus, config_.src_vocab_size)),
                               g.param(emb_src_.table()));
  return nn::concat_cols<T>({guu_plus_(g, plus), guu_minus_(g, minus)});
}

double sample_vmf_w(double kappa, int dim, Rng& rng) {
  if (!(kappa > 0.0)) throw Error("vMF: kappa must be > 0");
  if (dim < 2) throw Error("vMF: dimension must be >= 2");
  const double m1 = dim - 1.0;
  const double b = m1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + m1 * m1));
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + m1 * std::log(1.0 - x0 * x0);
  std::gamma_distribution<double> gamma(m1 / 2.0, 1.0);
  for (;;) {
    const double ga = gamma(rng.engine());
    const double gb = gamma(rng.engine());
    const double z = ga / (ga + gb);
    const double w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    const double u = rng.uniform();
    if (kappa * w + m1 * std::log(1.0 - x0 * w) - c >= std::log(u)) return w;
  }
}

template <class T>
typename EveModel<T>::Var EveModel<T>::guu_sample(Graph& g, Var f, Rng* rng) const {
  const Var norm = nn::row_norm(f);
  for (Eigen::Index r = 0; r < norm.rows(); ++r)
    if (!(norm.value()(r, 0) > T(0))) throw Error("undefined direction");
  const Var dir = nn::mul_col(f, nn::reciprocal(norm));
  const T eps = static_cast<T>(config_.guu_eps);
  const Var trunc = nn::clamp(norm, T(0), T(10) - eps);
  if (!rng) return nn::mul_col(dir, trunc);

  const Eigen::Index rows = f.rows(), d = f.cols();
  Matrix noise(rows, d), wcol(rows, 1), scol(rows, 1), ucol(rows, 1);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double w = sample_vmf_w(config_.guu_kappa, static_cast<int>(d), *rng);
    wcol(r, 0) = static_cast<T>(w);
    scol(r, 0) = static_cast<T>(std::sqrt(std::max(0.0, 1.0 - w * w)));
    for (Eigen::Index k = 0; k < d; ++k) noise(r, k) = static_cast<T>(rng->normal());
    ucol(r, 0) = static_cast<T>(rng->uniform() * config_.guu_eps);
  }
  const Var gvec = g.constant(std::move(noise));
  const Var orth = nn::sub(gvec, nn::mul_col(dir, nn::row_dot(gvec, dir)));
  const Var v = nn::mul_col(orth, nn::reciprocal(nn::row_norm(orth)));
  const Var zdir = nn::add(nn::mul_col(dir, g.constant(std::move(wcol))),
                           nn::mul_col(v, g.constant(std::move(scol))));
  const Var znorm = nn::add(trunc, g.constant(std::move(ucol)));
  return nn::mul_col(zdir, znorm);
}

template <class T>
typename EveModel<T>::Var EveModel<T>::encode_map(Graph& g, const PreparedBatch& b) const {
  switch (config_.variant) {
    case Variant::Eve: return infer_posterior(g, encode_edit(g, b)).mu;
    case Variant::Yin: return encode_edit(g, b);
    case Variant::Guu: return guu_sample(g, guu_encode(g, b), nullptr);
  }
  return {};
}

template <class T>
DecoderCondition<T> EveModel<T>::condition(Graph& g, Var rep, Var doc_final) const {
  if (rep.cols() != config_.rep_dim()) throw DimensionError("decoder: representation width");
  const Eigen::Index dh = config_.decoder_hidden();
  const Var init = nn::tanh(bridge_(g, nn::concat_cols<T>({rep, doc_final})));
  return {latent_(g, rep), {nn::slice_cols(init, 0, dh), nn::slice_cols(init, dh, dh)}};
}

template <class T>
DecoderStep<T> EveModel<T>::decoder_step(Graph& g, const DocMemory<T>& doc,
                                         const nn::LstmState<T>& state, Var latent,
                                         std::span<const int> tokens,
                                         std::span<const int> src_of_row) const {
  const nn::AttentionResult<T> att =
      attention_.attend(g, state.h, doc.keys, doc.memory, doc.lengths, src_of_row);
  const Var x = nn::concat_cols<T>({emb_tgt_(g, tokens), latent, att.context});
  DecoderStep<T> s;
  s.state = decoder_.step(g, state, x);
  s.readout = nn::concat_cols<T>({s.state.h, att.context});
  s.attention = att.weights;
  return s;
}

template <class T>
typename EveModel<T>::Var EveModel<T>::output_logits(Graph& g, Var readout) const {
  return out_(g, readout);
}

template <class T>
typename EveModel<T>::Var EveModel<T>::decode_teacher_forced(
    Graph& g, const DocMemory<T>& doc, Var rep,
    const std::vector<std::vector<int>>& inputs) const {
  if (inputs.empty()) throw DimensionError("decode_teacher_forced: no steps");
  const DecoderCondition<T> cond = condition(g, rep, doc.encoded.final);
  std::vector<int> identity(static_cast<std::size_t>(rep.rows()));
  std::iota(identity.begin(), identity.end(), 0);
  nn::LstmState<T> state = cond.init;
  std::vector<Var> readouts;
  readouts.reserve(inputs.size());
  for (const auto& tokens : inputs) {
    DecoderStep<T> s = decoder_step(g, doc, state, cond.latent, tokens, identity);
    state = s.state;
    readouts.push_back(s.readout);
  }
  return output_logits(g, nn::vstack<T>(readouts));
}

template <class T>
nn::Matrix<double> extract_representations(const EveModel<T>& model,
                                           std::span<const EditExample> examples,
                                           std::size_t batch_size) {
  const std::vector<AlignedEdit> edits = align_all(examples);
  nn::Matrix<double> out(static_cast<Eigen::Index>(examples.size()), model.config().rep_dim());
  for (std::size_t start = 0; start < examples.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, examples.size() - start);
    const PreparedBatch b = prepare_batch(model.src_vocab(), model.tgt_vocab(),
                                          examples.subspan(start, n),
                                          std::span<const AlignedEdit>(edits).subspan(start, n));
    nn::Graph<T> g(false);
    const nn::Var<T> rep = model.encode_map(g, b);
    out.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(n)) =
        rep.value().template cast<double>();
  }
  return out;
}

// -- persistence ------------------------------------------------------------------

namespace {

nlohmann::json vocab_json(const Vocabulary& v) {
  return {{"tokens", v.tokens()}, {"hash", v.hash()}};
}

Vocabulary vocab_from_json(const nlohmann::json& j, const char* side) {
  Vocabulary v = Vocabulary::from_tokens(j.at("tokens").get<std::vector<std::string>>());
  if (v.hash() != j.at("hash").get<std::string>())
    throw FormatError(std::string("checkpoint ") + side + " vocabulary hash does not match its tokens");
  return v;
}

}  // namespace

template <class T>
CheckpointFile model_checkpoint(const EveModel<T>& model) {
  CheckpointFile file;
  file.meta["config"] = to_json(model.config());
  file.meta["vocab"] = {{"source", vocab_json(model.src_vocab())},
                        {"target", vocab_json(model.tgt_vocab())}};
  for (const nn::Parameter<T>* p : model.params().parameters())
    file.tensors.push_back(to_block(p->name, p->value));
  return file;
}

template <class T>
void load_parameters(EveModel<T>& model, const CheckpointFile& file) {
  for (nn::Parameter<T>* p : model.params().parameters()) from_block(file.at(p->name), p->value);
}

template <class T>
EveModel<T> model_from_checkpoint(const CheckpointFile& file) {
  try {
    const ModelConfig config = model_config_from_json(file.meta.at("config"));
    Vocabulary src = vocab_from_json(file.meta.at("vocab").at("source"), "source");
    Vocabulary tgt = vocab_from_json(file.meta.at("vocab").at("target"), "target");
    EveModel<T> model(config, std::move(src), std::move(tgt), 0);
    if (!(model.config() == config)) throw FormatError("checkpoint config disagrees with its vocabularies");
    load_parameters(model, file);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad checkpoint header: ") + e.what());
  }
}

template class EveModel<float>;
template class EveModel<double>;
template nn::Matrix<double> extract_representations<float>(const EveModel<float>&,
                                                           std::span<const EditExample>,
                                                           std::size_t);
template nn::Matrix<double> extract_representations<double>(const EveModel<double>&,
                                                            std::span<const EditExample>,
                                                            std::size_t);
template CheckpointFile model_checkpoint<float>(const EveModel<float>&);
template CheckpointFile model_checkpoint<double>(const EveModel<double>&);
template EveModel<float> model_from_checkpoint<float>(const CheckpointFile&);
template EveModel<double> model_from_checkpoint<double>(const CheckpointFile&);
template void load_parameters<float>(EveModel<float>&, const CheckpointFile&);
template void load_parameters<double>(EveModel<double>&, const CheckpointFile&);

}  // namespace eve
