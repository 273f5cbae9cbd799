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

#include "eve/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>

#include "eve/error.hpp"

namespace eve {

namespace fs = std::filesystem;

double kl_gaussian(std::span<const double> mu, std::span<const double> log_var) {
  if (mu.size() != log_var.size()) throw DimensionError("kl_gaussian: size mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k)
    s += 1.0 + log_var[k] - mu[k] * mu[k] - std::exp(log_var[k]);
  return -0.5 * s;
}

double xdelta_loss(std::span<const double> logits, std::span<const int> x_delta) {
  if (x_delta.empty()) return 0.0;
  if (logits.empty()) throw DimensionError("xdelta_loss: empty logits");
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double f : logits) z += std::exp(f - mx);
  const double lse = mx + std::log(z);
  double loss = 0.0;
  for (int id : x_delta) {
    if (id < 0 || id >= static_cast<int>(logits.size()))
      throw DimensionError("xdelta_loss: id " + std::to_string(id) + " out of range");
    loss -= logits[static_cast<std::size_t>(id)] - lse;
  }
  return loss;
}

double kl_weight(double step, const AnnealSchedule& s) {
  return 1.0 / (1.0 + std::exp(-s.steepness * (step - s.midpoint)));
}

void word_dropout(std::span<int> tokens, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw Error("word dropout rate must be in [0, 1]");
  if (rate == 0.0) return;
  for (int& t : tokens) {
    if (t == Vocabulary::kBos || t == Vocabulary::kEos || t == Vocabulary::kPad) continue;
    if (rng.bernoulli(rate)) t = Vocabulary::kUnk;
  }
}

template <class T>
void reset_decoder(EveModel<T>& model, Rng& rng) {
  for (nn::Parameter<T>* p : model.params().with_prefix(EveModel<T>::kDecoderPrefix))
    p->reinitialize(rng);
}

nlohmann::json LossBreakdown::to_json() const {
  nlohmann::json j;
  j["recon_nll"] = recon_nll;
  if (has_kl) {
    j["kl"] = kl;
    j["kl_weight"] = kl_weight;
  }
  if (has_xdelta) j["xdelta_nll"] = xdelta_nll;
  j["total"] = total;
  return j;
}

template <class T>
LossBreakdown LossTerms<T>::breakdown(const LossOptions& options) const {
  LossBreakdown b;
  b.recon_nll = recon.item();
  b.has_kl = kl.valid();
  b.has_xdelta = xdelta.valid();
  if (b.has_kl) {
    b.kl = kl.item();
    b.kl_weight = options.beta;
  }
  if (b.has_xdelta) {
    b.xdelta_nll = xdelta.item();
    b.xdelta_weight = options.lambda;
  }
  b.total = total.item();
  return b;
}

template <class T>
nn::Var<T> kl_term(nn::Graph<T>&, const LatentPosterior<T>& p) {
  const auto rows = static_cast<T>(p.mu.rows());
  const nn::Var<T> inner =
      nn::sub(nn::sub(nn::shift(p.log_var, T(1)), nn::square(p.mu)), nn::exp(p.log_var));
  return nn::scale(nn::sum(inner), T(-0.5) / rows);
}

template <class T>
LossTerms<T> compute_loss(const EveModel<T>& model, nn::Graph<T>& g, const PreparedBatch& batch,
                          const LossOptions& options) {
  using Var = nn::Var<T>;
  const ModelConfig& c = model.config();
  const T rows = static_cast<T>(batch.rows);
  LossTerms<T> out;

  Var rep;
  switch (c.variant) {
    case Variant::Eve: {
      const LatentPosterior<T> post = model.infer_posterior(g, model.encode_edit(g, batch));
      nn::Matrix<T> e = nn::Matrix<T>::Zero(batch.rows, c.d_z);
      if (options.noise)
        for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = static_cast<T>(options.noise->normal());
      rep = model.reparameterize(g, post, e);
      out.kl = kl_term(g, post);
      break;
    }
    case Variant::Yin: rep = model.encode_edit(g, batch); break;
    case Variant::Guu: rep = model.guu_sample(g, model.guu_encode(g, batch), options.noise); break;
  }

  const DocMemory<T> doc = model.encode_doc(g, batch);
  const Var logits = model.decode_teacher_forced(g, doc, rep, batch.dec_inputs);
  std::vector<nn::SparseTarget> targets;
  targets.reserve(batch.target_tokens());
  for (std::size_t j = 0; j < batch.dec_targets.size(); ++j)
    for (int r = 0; r < batch.rows; ++r)
      if (static_cast<int>(j) < batch.tgt_lengths[static_cast<std::size_t>(r)])
        targets.push_back({static_cast<Eigen::Index>(j) * batch.rows + r,
                           batch.dec_targets[j][static_cast<std::size_t>(r)], 1.0});
  out.target_tokens = targets.size();
  out.recon = nn::scale(nn::softmax_cross_entropy<T>(logits, targets), T(1) / rows);
  out.total = out.recon;

  if (out.kl.valid() && options.beta != 0.0)
    out.total = nn::add(out.total, nn::scale(out.kl, static_cast<T>(options.beta)));

  if (c.variant == Variant::Eve && options.lambda != 0.0) {
    std::vector<nn::SparseTarget> bag;
    for (int r = 0; r < batch.rows; ++r)
      for (int id : batch.xdelta[static_cast<std::size_t>(r)]) bag.push_back({r, id, 1.0});
    const Var f = model.xdelta_logits(g, rep);
    out.xdelta = nn::scale(nn::softmax_cross_entropy<T>(f, bag), T(1) / rows);
    out.total = nn::add(out.total, nn::scale(out.xdelta, static_cast<T>(options.lambda)));
  }
  return out;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  if (!(lr > 0.0)) throw Error("lr must be > 0");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw Error("lr_decay must be in (0, 1]");
  if (!(clip_norm > 0.0)) throw Error("clip_norm must be > 0");
  if (xdelta_weight < 0.0) throw Error("xdelta_weight must be >= 0");
  if (pretrain_max_epochs < 1 || epochs < 1 || single_stage_max_epochs < 1)
    throw Error("epoch counts must be >= 1");
  if (patience < 1) throw Error("patience must be >= 1");
  if (!(anneal_k > 0.0)) throw Error("anneal_k must be > 0");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"seed", c.seed},
          {"batch_size", c.batch_size},
          {"bucket_by_length", c.bucket_by_length},
          {"lr", c.lr},
          {"lr_decay", c.lr_decay},
          {"clip_norm", c.clip_norm},
          {"two_stage", c.two_stage},
          {"use_kl", c.use_kl},
          {"xdelta_weight", c.xdelta_weight},
          {"pretrain_max_epochs", c.pretrain_max_epochs},
          {"epochs", c.epochs},
          {"single_stage_max_epochs", c.single_stage_max_epochs},
          {"patience", c.patience},
          {"anneal_k", c.anneal_k},
          {"anneal_x0", c.anneal_x0}};
}

namespace {

struct Accumulator {
  double n = 0.0;
  double recon = 0.0, kl = 0.0, xdelta = 0.0, total = 0.0, beta = 0.0;
  bool has_kl = false, has_xdelta = false;
  double lambda = 0.0;

  void add(const LossBreakdown& b, double rows) {
    n += rows;
    recon += rows * b.recon_nll;
    kl += rows * b.kl;
    xdelta += rows * b.xdelta_nll;
    total += rows * b.total;
    beta += rows * b.kl_weight;
    has_kl = b.has_kl;
    has_xdelta = b.has_xdelta;
    lambda = b.xdelta_weight;
  }

  LossBreakdown mean() const {
    LossBreakdown b;
    if (n == 0.0) return b;
    b.recon_nll = recon / n;
    b.kl = kl / n;
    b.xdelta_nll = xdelta / n;
    b.total = total / n;
    b.kl_weight = beta / n;
    b.has_kl = has_kl;
    b.has_xdelta = has_xdelta;
    b.xdelta_weight = lambda;
    return b;
  }
};

std::vector<EditExample> gather(std::span<const EditExample> all, const std::vector<std::size_t>& idx) {
  std::vector<EditExample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(all[i]);
  return out;
}

double select_value(const LossBreakdown& b, bool kl_counts) {
  return b.recon_nll + (kl_counts && b.has_kl ? b.kl : 0.0) +
         (b.has_xdelta ? b.xdelta_weight * b.xdelta_nll : 0.0);
}

template <class T>
void add_adam(CheckpointFile& file, const nn::Adam<T>& adam) {
  for (const auto& [name, mo] : adam.moments()) {
    file.tensors.push_back(to_block("adam.m/" + name, mo.m));
    file.tensors.push_back(to_block("adam.v/" + name, mo.v));
  }
  file.meta["adam_steps"] = adam.steps();
}

template <class T>
void restore_adam(const CheckpointFile& file, const EveModel<T>& model, nn::Adam<T>& adam) {
  std::map<std::string, nn::AdamMoments<T>> moments;
  for (const nn::Parameter<T>* p : model.params().parameters()) {
    const TensorBlock* m = file.find("adam.m/" + p->name);
    const TensorBlock* v = file.find("adam.v/" + p->name);
    if (!m || !v) continue;
    nn::AdamMoments<T> mo;
    mo.m = nn::Matrix<T>::Zero(p->value.rows(), p->value.cols());
    mo.v = nn::Matrix<T>::Zero(p->value.rows(), p->value.cols());
    from_block(*m, mo.m);
    from_block(*v, mo.v);
    moments.emplace(p->name, std::move(mo));
  }
  adam.restore(file.meta.at("adam_steps").get<std::int64_t>(), std::move(moments));
}

struct TrainState {
  std::string stage = "A";
  int epoch = 0;           // completed epochs in the current stage
  std::int64_t step = 0;   // optimizer steps in the current stage
  double best = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  int since_best = 0;
  nlohmann::json stages = nlohmann::json::array();
  nlohmann::json best_info = nullptr;

  nlohmann::json to_json() const {
    return {{"stage", stage},       {"epoch", epoch},           {"step", step},
            {"best", best},         {"best_epoch", best_epoch}, {"since_best", since_best},
            {"stages", stages},     {"best_info", best_info}};
  }
  static TrainState from_json(const nlohmann::json& j) {
    TrainState s;
    s.stage = j.at("stage").get<std::string>();
    s.epoch = j.at("epoch").get<int>();
    s.step = j.at("step").get<std::int64_t>();
    s.best = j.at("best").is_null() ? std::numeric_limits<double>::infinity()
                                    : j.at("best").get<double>();
    s.best_epoch = j.at("best_epoch").get<int>();
    s.since_best = j.at("since_best").get<int>();
    s.stages = j.at("stages");
    s.best_info = j.at("best_info");
    return s;
  }
};

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace

template <class T>
LossBreakdown evaluate_loss(const EveModel<T>& model, std::span<const EditExample> examples,
                            std::span<const AlignedEdit> edits, const LossOptions& options,
                            std::size_t batch_size) {
  if (examples.size() != edits.size()) throw DimensionError("evaluate_loss: size mismatch");
  Accumulator acc;
  LossOptions opts = options;
  opts.noise = nullptr;
  for (std::size_t start = 0; start < examples.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, examples.size() - start);
    const PreparedBatch b = prepare_batch(model.src_vocab(), model.tgt_vocab(),
                                          examples.subspan(start, n), edits.subspan(start, n));
    nn::Graph<T> g(false);
    const LossTerms<T> terms = compute_loss(model, g, b, opts);
    acc.add(terms.breakdown(opts), static_cast<double>(n));
  }
  return acc.mean();
}

template <class T>
nlohmann::json train(EveModel<T>& model, std::span<const EditExample> train_set,
                     std::span<const EditExample> valid_set, const TrainConfig& config,
                     const TrainOptions& options) {
  config.validate();
  if (train_set.empty()) throw Error("training set is empty");
  if (valid_set.empty()) throw Error("validation set is empty");
  const fs::path dir = options.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const fs::path last_path = dir / "last.ckpt", best_path = dir / "best.ckpt",
                 stage_a_path = dir / "stage_a_best.ckpt";

  const Rng root(config.seed);
  const Variant variant = model.config().variant;
  const bool staged = config.two_stage && variant == Variant::Eve;
  const bool kl_in_objective = variant == Variant::Eve && config.use_kl;
  const double lambda = variant == Variant::Eve ? config.xdelta_weight : 0.0;
  const std::vector<AlignedEdit> train_edits = align_all(train_set);
  const std::vector<AlignedEdit> valid_edits = align_all(valid_set);
  const std::size_t batches_per_epoch =
      (train_set.size() + config.batch_size - 1) / config.batch_size;
  AnnealSchedule schedule;
  schedule.steepness = config.anneal_k;
  schedule.midpoint = config.anneal_x0 >= 0.0
                          ? config.anneal_x0
                          : 0.5 * static_cast<double>(config.epochs * batches_per_epoch);

  nn::AdamConfig adam_config;
  adam_config.lr = config.lr;
  nn::Adam<T> adam(adam_config);
  TrainState st;
  if (!staged) st.stage = "B";

  nlohmann::json identity = {{"train", to_json(config)},
                             {"model", to_json(model.config())},
                             {"train_size", train_set.size()},
                             {"valid_size", valid_set.size()}};

  auto save_last = [&]() {
    CheckpointFile file = model_checkpoint(model);
    file.meta.update(options.extra_meta);
    file.meta["training_state"] = st.to_json();
    file.meta["run"] = identity;
    add_adam(file, adam);
    write_checkpoint(last_path, file);
  };

  if (options.resume && fs::exists(last_path)) {
    const CheckpointFile file = read_checkpoint(last_path);
    if (file.meta.at("run") != identity)
      throw Error("--resume: " + last_path.string() + " was written with a different configuration");
    load_parameters(model, file);
    restore_adam(file, model, adam);
    st = TrainState::from_json(file.meta.at("training_state"));
  }

  std::ostream* log = options.log;
  int epochs_this_run = 0;
  bool halted = false;
  for (;;) {
    if (st.stage == "A" && (st.epoch >= config.pretrain_max_epochs || st.since_best >= config.patience)) {
      load_parameters(model, read_checkpoint(stage_a_path));
      Rng reset_rng = root.derive("reset");
      reset_decoder(model, reset_rng);
      adam = nn::Adam<T>(adam_config);
      st.stage = "B";
      st.epoch = 0;
      st.step = 0;
      st.best = std::numeric_limits<double>::infinity();
      st.best_epoch = 0;
      st.since_best = 0;
      save_last();
      if (log) *log << "stage A done; decoder reset\n";
      continue;
    }
    const int max_epochs = staged ? config.epochs : config.single_stage_max_epochs;
    if (st.stage == "B" &&
        (st.epoch >= max_epochs || (!staged && st.since_best >= config.patience)))
      break;
    if (options.halt_after_epochs >= 0 && epochs_this_run >= options.halt_after_epochs) {
      halted = true;
      break;
    }

    const bool stage_a = st.stage == "A";
    const std::string tag = st.stage;
    const auto epoch_index = static_cast<std::uint64_t>(st.epoch);
    Rng dropout_rng = root.derive("dropout/" + tag, epoch_index);
    Rng noise_rng = root.derive("sampling/" + tag, epoch_index);
    const std::uint64_t batch_seed = root.derive("batches/" + tag, epoch_index).seed();
    const std::vector<Batch> batches =
        make_batches(train_set, config.batch_size, config.bucket_by_length, batch_seed, train_edits);

    const double lr = config.lr * std::pow(config.lr_decay, static_cast<double>(st.epoch));
    adam.set_lr(lr);

    Accumulator acc;
    double beta_start = 0.0, beta_end = 0.0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const Batch& raw = batches[bi];
      const std::vector<EditExample> exs = gather(train_set, raw.indices);
      PreparedBatch b = prepare_batch(model.src_vocab(), model.tgt_vocab(), exs, raw.edits);
      for (std::size_t j = 1; j < b.dec_inputs.size(); ++j)
        word_dropout(b.dec_inputs[j], model.config().word_dropout, dropout_rng);
      const double beta =
          (!stage_a && kl_in_objective) ? kl_weight(static_cast<double>(st.step), schedule) : 0.0;
      if (bi == 0) beta_start = beta;
      beta_end = beta;
      LossOptions lo{beta, lambda, &noise_rng};

      model.params().zero_grad();
      nn::Graph<T> g;
      const LossTerms<T> terms = compute_loss(model, g, b, lo);
      const LossBreakdown bd = terms.breakdown(lo);
      const std::string where = "stage " + tag + " epoch " + std::to_string(st.epoch + 1) +
                                " batch " + std::to_string(bi);
      if (!std::isfinite(bd.total)) throw NonFiniteError("non-finite loss at " + where);
      g.backward(terms.total);
      const auto params = model.params().parameters();
      const double norm = nn::clip_global_norm(params, config.clip_norm);
      if (!std::isfinite(norm)) throw NonFiniteError("non-finite gradient at " + where);
      adam.step(params);
      acc.add(bd, static_cast<double>(b.rows));
      ++st.step;
    }

    LossOptions vo{beta_end, lambda, nullptr};
    const LossBreakdown valid = evaluate_loss<T>(model, valid_set, valid_edits, vo);
    const double select = select_value(valid, !stage_a && kl_in_objective);
    ++st.epoch;
    ++epochs_this_run;
    const bool improved = select < st.best;
    if (improved) {
      st.best = select;
      st.best_epoch = st.epoch;
      st.since_best = 0;
      CheckpointFile file = model_checkpoint(model);
      file.meta.update(options.extra_meta);
      file.meta["training"] = {{"stage", tag}, {"epoch", st.epoch}, {"valid", valid.to_json()}};
      write_checkpoint(stage_a ? stage_a_path : best_path, file);
      if (!stage_a)
        st.best_info = {{"stage", tag}, {"epoch", st.epoch}, {"valid", valid.to_json()},
                        {"select", select}};
    } else {
      ++st.since_best;
    }

    nlohmann::json entry = {{"epoch", st.epoch},
                            {"steps", st.step},
                            {"train", acc.mean().to_json()},
                            {"valid", valid.to_json()},
                            {"select", select},
                            {"improved", improved}};
    if (config.lr_decay != 1.0) entry["lr"] = lr;
    if (kl_in_objective || variant == Variant::Eve) {
      entry["kl_weight_start"] = beta_start;
      entry["kl_weight_end"] = beta_end;
    }
    if (st.stages.empty() || st.stages.back().at("stage") != tag)
      st.stages.push_back({{"stage", tag}, {"epochs", nlohmann::json::array()}});
    st.stages.back()["epochs"].push_back(entry);

    if (log) {
      const LossBreakdown tr = acc.mean();
      *log << "stage " << tag << " epoch " << st.epoch << ": train total " << tr.total
           << " recon " << tr.recon_nll;
      if (tr.has_kl) *log << " kl " << tr.kl << " beta " << beta_end;
      if (tr.has_xdelta) *log << " xdelta " << tr.xdelta_nll;
      *log << " | valid total " << valid.total << " recon " << valid.recon_nll;
      if (valid.has_kl) *log << " kl " << valid.kl;
      *log << (improved ? " *" : "") << std::endl;
    }
    save_last();
  }

  nlohmann::json report;
  report["variant"] = std::string(variant_name(variant));
  report["label"] = options.label.empty() ? std::string(variant_name(variant)) : options.label;
  report["objective"] = {{"two_stage", staged},
                         {"kl", kl_in_objective},
                         {"xdelta_weight", lambda},
                         {"kl_schedule", {{"k", schedule.steepness}, {"x0", schedule.midpoint}}}};
  report["stages"] = st.stages;
  report["halted"] = halted;
  if (!halted) {
    load_parameters(model, read_checkpoint(best_path));
    report["best_checkpoint"] = best_path.filename().string();
    report["best"] = st.best_info;
  }
  write_json(dir / "report.json", report);
  return report;
}

template void reset_decoder<float>(EveModel<float>&, Rng&);
template void reset_decoder<double>(EveModel<double>&, Rng&);
template struct LossTerms<float>;
template struct LossTerms<double>;
template nn::Var<float> kl_term<float>(nn::Graph<float>&, const LatentPosterior<float>&);
template nn::Var<double> kl_term<double>(nn::Graph<double>&, const LatentPosterior<double>&);
template LossTerms<float> compute_loss<float>(const EveModel<float>&, nn::Graph<float>&,
                                              const PreparedBatch&, const LossOptions&);
template LossTerms<double> compute_loss<double>(const EveModel<double>&, nn::Graph<double>&,
                                                const PreparedBatch&, const LossOptions&);
template LossBreakdown evaluate_loss<float>(const EveModel<float>&, std::span<const EditExample>,
                                            std::span<const AlignedEdit>, const LossOptions&,
                                            std::size_t);
template LossBreakdown evaluate_loss<double>(const EveModel<double>&, std::span<const EditExample>,
                                             std::span<const AlignedEdit>, const LossOptions&,
                                             std::size_t);
template nlohmann::json train<float>(EveModel<float>&, std::span<const EditExample>,
                                     std::span<const EditExample>, const TrainConfig&,
                                     const TrainOptions&);
template nlohmann::json train<double>(EveModel<double>&, std::span<const EditExample>,
                                      std::span<const EditExample>, const TrainConfig&,
                                      const TrainOptions&);

}  // namespace eve
