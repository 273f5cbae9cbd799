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

#include "run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "toml.hpp"

namespace eve::cli {

namespace {

using KeySet = std::set<std::string, std::less<>>;

void reject_unknown(const toml::table& t, const KeySet& known, const std::string& where) {
  for (const auto& [k, v] : t) {
    if (!known.count(k.str()))
      throw ConfigError("unknown key " + where + std::string(k.str()));
  }
}

template <class T>
void read(const toml::table& t, std::string_view key, T& dst, const std::string& where) {
  const toml::node* n = t.get(key);
  if (!n) return;
  const std::string name = where + std::string(key);
  if constexpr (std::is_same_v<T, bool>) {
    auto v = n->value<bool>();
    if (!v || !n->is_boolean()) throw ConfigError(name + ": expected a boolean");
    dst = *v;
  } else if constexpr (std::is_integral_v<T>) {
    if (!n->is_integer()) throw ConfigError(name + ": expected an integer");
    const std::int64_t v = *n->value<std::int64_t>();
    if (std::is_unsigned_v<T> && v < 0) throw ConfigError(name + ": must be non-negative");
    dst = static_cast<T>(v);
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!n->is_number()) throw ConfigError(name + ": expected a number");
    dst = static_cast<T>(*n->value<double>());
  } else {
    if (!n->is_string()) throw ConfigError(name + ": expected a string");
    dst = *n->value<std::string>();
  }
}

const toml::table* section(const toml::table& root, std::string_view name) {
  const toml::node* n = root.get(name);
  if (!n) return nullptr;
  if (!n->is_table()) throw ConfigError("[" + std::string(name) + "] must be a table");
  return n->as_table();
}

}  // namespace

void RunConfig::finalize() {
  training.seed = seed;
  probe.seed = seed;
}

RunConfig parse_run_config(std::string_view text, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ":" << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
  RunConfig c;
  reject_unknown(root, {"seed", "data", "model", "training", "probe"}, "");
  read(root, "seed", c.seed, "");

  if (const toml::table* t = section(root, "data")) {
    reject_unknown(*t, {"dir", "min_len", "max_len", "min_freq"}, "data.");
    read(*t, "dir", c.data.dir, "data.");
    read(*t, "min_len", c.data.min_len, "data.");
    read(*t, "max_len", c.data.max_len, "data.");
    read(*t, "min_freq", c.data.min_freq, "data.");
  }
  if (const toml::table* t = section(root, "model")) {
    reject_unknown(*t, {"d_emb", "d_h", "d_z", "word_dropout", "beam_width", "max_decode_len",
                        "variant", "guu_kappa", "guu_eps"},
                   "model.");
    read(*t, "d_emb", c.model.d_emb, "model.");
    read(*t, "d_h", c.model.d_h, "model.");
    read(*t, "d_z", c.model.d_z, "model.");
    read(*t, "word_dropout", c.model.word_dropout, "model.");
    read(*t, "beam_width", c.model.beam_width, "model.");
    read(*t, "max_decode_len", c.model.max_decode_len, "model.");
    std::string variant(variant_name(c.model.variant));
    read(*t, "variant", variant, "model.");
    try {
      c.model.variant = parse_variant(variant);
    } catch (const Error& e) {
      throw ConfigError(std::string("model.variant: ") + e.what());
    }
    read(*t, "guu_kappa", c.model.guu_kappa, "model.");
    read(*t, "guu_eps", c.model.guu_eps, "model.");
  }
  if (const toml::table* t = section(root, "training")) {
    reject_unknown(*t, {"batch_size", "bucket_by_length", "lr", "lr_decay", "clip_norm", "two_stage", "use_kl",
                        "xdelta_weight", "pretrain_max_epochs", "epochs", "single_stage_max_epochs",
                        "patience", "anneal_k", "anneal_x0"},
                   "training.");
    TrainConfig& tc = c.training;
    read(*t, "batch_size", tc.batch_size, "training.");
    read(*t, "bucket_by_length", tc.bucket_by_length, "training.");
    read(*t, "lr", tc.lr, "training.");
    read(*t, "lr_decay", tc.lr_decay, "training.");
    read(*t, "clip_norm", tc.clip_norm, "training.");
    read(*t, "two_stage", tc.two_stage, "training.");
    read(*t, "use_kl", tc.use_kl, "training.");
    read(*t, "xdelta_weight", tc.xdelta_weight, "training.");
    read(*t, "pretrain_max_epochs", tc.pretrain_max_epochs, "training.");
    read(*t, "epochs", tc.epochs, "training.");
    read(*t, "single_stage_max_epochs", tc.single_stage_max_epochs, "training.");
    read(*t, "patience", tc.patience, "training.");
    read(*t, "anneal_k", tc.anneal_k, "training.");
    read(*t, "anneal_x0", tc.anneal_x0, "training.");
  }
  if (const toml::table* t = section(root, "probe")) {
    reject_unknown(*t, {"depths", "hidden", "mode", "epochs", "patience", "lr", "batch_size"}, "probe.");
    if (const toml::node* n = t->get("depths")) {
      const toml::array* arr = n->as_array();
      if (!arr) throw ConfigError("probe.depths: expected an array of integers");
      c.depths.clear();
      for (const toml::node& d : *arr) {
        if (!d.is_integer()) throw ConfigError("probe.depths: expected an array of integers");
        c.depths.push_back(static_cast<int>(*d.value<std::int64_t>()));
      }
    }
    read(*t, "hidden", c.probe.hidden, "probe.");
    std::string mode(probe_mode_name(c.probe.mode));
    read(*t, "mode", mode, "probe.");
    try {
      c.probe.mode = parse_probe_mode(mode);
    } catch (const Error& e) {
      throw ConfigError(std::string("probe.mode: ") + e.what());
    }
    read(*t, "epochs", c.probe.epochs, "probe.");
    read(*t, "patience", c.probe.patience, "probe.");
    read(*t, "lr", c.probe.lr, "probe.");
    read(*t, "batch_size", c.probe.batch_size, "probe.");
  }
  c.finalize();
  try {
    ModelConfig probe_model = c.model;
    probe_model.src_vocab_size = probe_model.tgt_vocab_size = Vocabulary::kNumReserved;
    probe_model.validate();
    c.training.validate();
    c.probe.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (c.data.min_len > c.data.max_len) throw ConfigError("data.min_len exceeds data.max_len");
  if (c.data.min_freq < 1) throw ConfigError("data.min_freq must be >= 1");
  if (c.depths.empty()) throw ConfigError("probe.depths must not be empty");
  for (int d : c.depths)
    if (d < 0) throw ConfigError("probe.depths must be non-negative");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.string());
}

std::string to_toml(const RunConfig& c) {
  toml::array depths;
  for (int d : c.depths) depths.push_back(d);
  toml::table root{
      {"seed", static_cast<std::int64_t>(c.seed)},
      {"data", toml::table{{"dir", c.data.dir},
                           {"min_len", static_cast<std::int64_t>(c.data.min_len)},
                           {"max_len", static_cast<std::int64_t>(c.data.max_len)},
                           {"min_freq", c.data.min_freq}}},
      {"model", toml::table{{"d_emb", c.model.d_emb},
                            {"d_h", c.model.d_h},
                            {"d_z", c.model.d_z},
                            {"word_dropout", c.model.word_dropout},
                            {"beam_width", c.model.beam_width},
                            {"max_decode_len", c.model.max_decode_len},
                            {"variant", std::string(variant_name(c.model.variant))},
                            {"guu_kappa", c.model.guu_kappa},
                            {"guu_eps", c.model.guu_eps}}},
      {"training", toml::table{{"batch_size", static_cast<std::int64_t>(c.training.batch_size)},
                               {"bucket_by_length", c.training.bucket_by_length},
                               {"lr", c.training.lr},
                               {"lr_decay", c.training.lr_decay},
                               {"clip_norm", c.training.clip_norm},
                               {"two_stage", c.training.two_stage},
                               {"use_kl", c.training.use_kl},
                               {"xdelta_weight", c.training.xdelta_weight},
                               {"pretrain_max_epochs", c.training.pretrain_max_epochs},
                               {"epochs", c.training.epochs},
                               {"single_stage_max_epochs", c.training.single_stage_max_epochs},
                               {"patience", c.training.patience},
                               {"anneal_k", c.training.anneal_k},
                               {"anneal_x0", c.training.anneal_x0}}},
      {"probe", toml::table{{"depths", depths},
                            {"hidden", c.probe.hidden},
                            {"mode", std::string(probe_mode_name(c.probe.mode))},
                            {"epochs", c.probe.epochs},
                            {"patience", c.probe.patience},
                            {"lr", c.probe.lr},
                            {"batch_size", static_cast<std::int64_t>(c.probe.batch_size)}}}};
  std::ostringstream out;
  out << root << "\n";
  return out.str();
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json model = eve::to_json(c.model);
  model.erase("src_vocab_size");
  model.erase("tgt_vocab_size");
  nlohmann::json training = eve::to_json(c.training);
  training.erase("seed");
  nlohmann::json probe = eve::to_json(c.probe);
  probe.erase("seed");
  probe.erase("depth");
  probe["depths"] = c.depths;
  return {{"seed", c.seed},
          {"data",
           {{"dir", c.data.dir},
            {"min_len", c.data.min_len},
            {"max_len", c.data.max_len},
            {"min_freq", c.data.min_freq}}},
          {"model", model},
          {"training", training},
          {"probe", probe}};
}

std::string default_config_text() {
  RunConfig c;
  c.finalize();
  return to_toml(c);
}

}  // namespace eve::cli
