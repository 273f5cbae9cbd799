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

#include "cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "eve/alignment.hpp"
#include "eve/beam.hpp"
#include "eve/checkpoint.hpp"
#include "eve/corpus.hpp"
#include "eve/hash.hpp"
#include "eve/metrics.hpp"
#include "eve/model.hpp"
#include "eve/probe.hpp"
#include "eve/training.hpp"
#include "json.hpp"
#include "run_config.hpp"

namespace eve::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using Model = EveModel<float>;

namespace {

struct Io {
  std::ostream& out;
  std::ostream& err;
};

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

LoadOptions load_options(const DataConfig& d) { return {d.min_len, d.max_len}; }

fs::path split_path(const fs::path& dir, const std::string& split) {
  if (split != "train" && split != "valid" && split != "test")
    throw ConfigError("--split must be one of train, valid, test");
  return dir / (split + ".jsonl");
}

std::vector<int> parse_int_list(const std::string& text, const char* flag) {
  std::vector<int> values;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      values.push_back(v);
    } catch (const std::logic_error&) {
      throw ConfigError(std::string(flag) + ": not an integer list: " + text);
    }
  }
  if (values.empty()) throw ConfigError(std::string(flag) + ": empty list");
  return values;
}

std::array<double, 3> parse_ratios(const std::string& text) {
  std::array<double, 3> r{};
  std::stringstream s(text);
  std::string item;
  std::size_t i = 0;
  while (std::getline(s, item, ',')) {
    if (i == 3) throw ConfigError("--ratios needs three values");
    try {
      r[i++] = std::stod(item);
    } catch (const std::logic_error&) {
      throw ConfigError("--ratios: not a number: " + item);
    }
  }
  if (i != 3) throw ConfigError("--ratios needs three values");
  return r;
}

TokenSeq tokenize(const std::string& line) {
  TokenSeq tokens;
  std::istringstream s(line);
  for (std::string t; s >> t;) tokens.push_back(t);
  return tokens;
}

/// Whitespace-tokenized text, or JSONL with one token array (or {"tokens": [...]}) per line.
std::vector<TokenSeq> read_token_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  const bool jsonl = path.extension() == ".jsonl";
  std::vector<TokenSeq> seqs;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!jsonl) {
      seqs.push_back(tokenize(line));
      continue;
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      if (j.is_object()) j = j.at("tokens");
      seqs.push_back(j.get<TokenSeq>());
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return seqs;
}

json stats_json(const EditStats& s) {
  return {{"size", s.size},
          {"frac_only_insert", s.frac_only_insert},
          {"frac_only_delete", s.frac_only_delete},
          {"frac_only_replace", s.frac_only_replace},
          {"mean_length", s.mean_length}};
}

std::string tag_row(const AlignedEdit& e) {
  std::string row;
  for (std::size_t i = 0; i < e.tags.size(); ++i) {
    if (i) row += ' ';
    row += tag_symbol(e.tags[i]);
  }
  return row;
}

void emit(const Io& io, bool as_json, const json& report, const std::string& summary) {
  if (as_json)
    io.out << report.dump(2) << "\n";
  else
    io.out << summary;
}

// Checkpoint loading shared by eval, encode and probe.

struct LoadedModel {
  std::unique_ptr<Model> model;
  RunConfig config;
  std::string hash;
};

LoadedModel load_model(const fs::path& path) {
  LoadedModel lm;
  const CheckpointFile file = read_checkpoint(path);
  lm.model = std::make_unique<Model>(model_from_checkpoint<float>(file));
  if (file.meta.contains("run_config_toml"))
    lm.config = parse_run_config(file.meta.at("run_config_toml").get<std::string>(), path.string());
  else
    lm.config.finalize();
  lm.config.model = lm.model->config();
  lm.hash = hash_file(path);
  return lm;
}

void check_vocab(const LoadedModel& lm, const fs::path& data_dir) {
  const std::vector<EditExample> train =
      load_jsonl(data_dir / "train.jsonl", load_options(lm.config.data));
  const Vocabulary src = build_vocab(train, Side::Source, lm.config.data.min_freq);
  const Vocabulary tgt = build_vocab(train, Side::Target, lm.config.data.min_freq);
  if (src.hash() != lm.model->src_vocab().hash() || tgt.hash() != lm.model->tgt_vocab().hash())
    throw VocabMismatchError("vocabulary of " + (data_dir / "train.jsonl").string() +
                             " does not match the checkpoint (source " + src.hash() + " vs " +
                             lm.model->src_vocab().hash() + ", target " + tgt.hash() + " vs " +
                             lm.model->tgt_vocab().hash() + ")");
}

// ---------------------------------------------------------------------------

struct GenDataArgs {
  std::size_t n = 10000;
  std::string classes;
  std::uint64_t seed = 1;
  std::string out;
  std::string ratios = "0.8,0.1,0.1";
  std::size_t base_vocab = 200;
  bool json = false;
};

int cmd_gen_data(const GenDataArgs& a, const Io& io) {
  std::vector<RuleClass> classes;
  if (a.classes.empty()) {
    classes.assign(kAllRuleClasses.begin(), kAllRuleClasses.end());
  } else {
    std::stringstream s(a.classes);
    std::string name;
    while (std::getline(s, name, ',')) {
      try {
        classes.push_back(parse_rule(name));
      } catch (const Error& e) {
        throw ConfigError(std::string("--classes: ") + e.what());
      }
    }
  }
  if (a.base_vocab == 0 || a.base_vocab > 200) throw ConfigError("--base-vocab must be in 1..200");
  const std::array<double, 3> ratios = parse_ratios(a.ratios);
  const Rng root(a.seed);
  std::vector<EditExample> all;
  Splits parts;
  try {
    all = gen_synthetic(a.n, classes, root.derive("data").seed(), a.base_vocab);
    parts = split(all, ratios, root.derive("data/split").seed());
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const fs::path out(a.out);
  make_dir(out);
  json stats = json::object();
  std::ostringstream summary;
  for (const auto& [name, set] : {std::pair<const char*, const std::vector<EditExample>*>{"train", &parts.train},
                                  {"valid", &parts.valid},
                                  {"test", &parts.test}}) {
    save_jsonl(out / (std::string(name) + ".jsonl"), *set);
    stats[name] = stats_json(edit_stats(align_all(*set)));
    summary << name << ": " << set->size() << " examples\n";
  }
  std::vector<std::string> names;
  for (RuleClass c : classes) names.emplace_back(rule_name(c));
  const json config = {{"n", a.n},           {"classes", names},
                       {"seed", a.seed},     {"ratios", ratios},
                       {"base_vocab", a.base_vocab}};
  write_json(out / "stats.json", stats);
  write_json(out / "gen_config.json", config);
  emit(io, a.json, {{"out", out.string()}, {"config", config}, {"stats", stats}}, summary.str());
  return kOk;
}

// ---------------------------------------------------------------------------

struct AlignArgs {
  std::string src;
  std::string tgt;
  std::string data;
  bool stats = false;
  bool json = false;
};

int cmd_align(const AlignArgs& a, const Io& io) {
  std::vector<std::pair<TokenSeq, TokenSeq>> pairs;
  if (!a.data.empty()) {
    if (!a.src.empty() || !a.tgt.empty()) throw ConfigError("--data excludes --src/--tgt");
    LoadOptions opts;
    opts.min_len = 0;
    opts.max_len = static_cast<std::size_t>(-1);
    for (EditExample& e : load_jsonl(a.data, opts)) pairs.emplace_back(std::move(e.src), std::move(e.tgt));
  } else {
    pairs.emplace_back(tokenize(a.src), tokenize(a.tgt));
  }
  std::vector<AlignedEdit> edits;
  for (const auto& [s, t] : pairs) edits.push_back(align(s, t));
  if (a.stats) {
    const json j = stats_json(edit_stats(edits));
    std::ostringstream s;
    s << "examples " << j["size"] << "\nonly_insert " << j["frac_only_insert"] << "\nonly_delete "
      << j["frac_only_delete"] << "\nonly_replace " << j["frac_only_replace"] << "\nmean_length "
      << j["mean_length"] << "\n";
    emit(io, a.json, j, s.str());
    return kOk;
  }
  for (const AlignedEdit& e : edits) {
    if (a.json) {
      json tags = json::array();
      for (EditTag t : e.tags) tags.push_back(std::string(tag_symbol(t)));
      io.out << json{{"src", e.src_padded}, {"tgt", e.tgt_padded}, {"tags", tags}}.dump() << "\n";
    } else {
      auto row = [](const TokenSeq& seq) {
        std::string r;
        for (std::size_t i = 0; i < seq.size(); ++i) r += (i ? " " : "") + seq[i];
        return r;
      };
      io.out << row(e.src_padded) << "\n" << row(e.tgt_padded) << "\n" << tag_row(e) << "\n\n";
    }
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string variant;
  std::string data;
  std::string out;
  std::string label;
  bool resume = false;
  int halt_after = -1;
  bool quiet = false;
  bool json = false;
};

int cmd_train(const TrainArgs& a, const Io& io) {
  RunConfig config = a.config.empty() ? RunConfig{} : load_run_config(a.config);
  if (!a.variant.empty()) {
    try {
      config.model.variant = parse_variant(a.variant);
    } catch (const Error& e) {
      throw ConfigError(std::string("--variant: ") + e.what());
    }
  }
  if (!a.data.empty()) config.data.dir = a.data;
  config.finalize();

  const fs::path data_dir(config.data.dir);
  const std::vector<EditExample> train_set =
      load_jsonl(data_dir / "train.jsonl", load_options(config.data));
  const std::vector<EditExample> valid_set =
      load_jsonl(data_dir / "valid.jsonl", load_options(config.data));
  if (train_set.empty()) throw FormatError("no usable training examples in " + data_dir.string());
  if (valid_set.empty()) throw FormatError("no usable validation examples in " + data_dir.string());

  const Vocabulary src = build_vocab(train_set, Side::Source, config.data.min_freq);
  const Vocabulary tgt = build_vocab(train_set, Side::Target, config.data.min_freq);
  Model model(config.model, src, tgt, config.seed);
  config.model = model.config();

  const fs::path out(a.out);
  make_dir(out);
  const std::string toml_text = to_toml(config);
  write_text(out / "config.toml", toml_text);

  TrainOptions opts;
  opts.out_dir = out;
  opts.resume = a.resume;
  opts.halt_after_epochs = a.halt_after;
  opts.log = a.quiet ? nullptr : &io.err;
  opts.label = a.label;
  opts.extra_meta = {{"run_config_toml", toml_text}, {"run_config", to_json(config)}};
  const json report = train(model, train_set, valid_set, config.training, opts);

  std::ostringstream s;
  if (report.value("halted", false)) {
    s << "halted; resume with --resume\n";
  } else {
    const json& best = report.at("best");
    s << variant_name(config.model.variant) << " best stage " << best.value("stage", "?")
      << " epoch " << best.value("epoch", 0) << " select " << best.value("select", 0.0) << "\n"
      << "checkpoint " << (out / "best.ckpt").string() << "\n";
  }
  emit(io, a.json, report, s.str());
  return kOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string ckpt;
  std::string data;
  std::string split = "test";
  int beam = 0;
  int max_len = 0;
  std::string out;
  bool json = false;
};

int cmd_eval(const EvalArgs& a, const Io& io) {
  const LoadedModel lm = load_model(a.ckpt);
  const fs::path data_dir(a.data);
  check_vocab(lm, data_dir);
  const std::vector<EditExample> examples =
      load_jsonl(split_path(data_dir, a.split), load_options(lm.config.data));
  if (examples.empty()) throw FormatError("no usable examples in split " + a.split);
  const int beam = a.beam > 0 ? a.beam : lm.model->config().beam_width;
  const int max_len = a.max_len > 0 ? a.max_len : lm.model->config().max_decode_len;
  if (a.beam < 0 || a.max_len < 0) throw ConfigError("--beam and --max-len must be positive");

  const std::vector<Generation> gens = generate(*lm.model, examples, beam, max_len);
  std::vector<TokenSeq> srcs, hyps, refs;
  double loglik = 0.0;
  std::size_t unfinished = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    srcs.push_back(examples[i].src);
    refs.push_back(examples[i].tgt);
    hyps.push_back(gens[i].tokens);
    loglik += gens[i].log_prob;
    if (!gens[i].finished) ++unfinished;
  }
  ScoreReport scores = score_corpus(srcs, hyps, refs);
  scores.cross_entropy = cross_entropy(*lm.model, examples);

  json report = {{"timestamp", timestamp()},
                 {"checkpoint", a.ckpt},
                 {"checkpoint_hash", lm.hash},
                 {"config", to_json(lm.config)},
                 {"data", data_dir.string()},
                 {"split", a.split},
                 {"beam", beam},
                 {"max_len", max_len},
                 {"output_log_likelihood", loglik},
                 {"unfinished", unfinished},
                 {"scores", scores.to_json()}};
  if (!a.out.empty()) {
    const fs::path out(a.out);
    make_dir(out);
    write_text(out / "config.toml", to_toml(lm.config));
    write_json(out / "score_report.json", report);
    std::ofstream h(out / "hypotheses.jsonl");
    if (!h) throw IoError("cannot write " + (out / "hypotheses.jsonl").string());
    for (std::size_t i = 0; i < gens.size(); ++i)
      h << json{{"src", srcs[i]}, {"hyp", hyps[i]}, {"ref", refs[i]}, {"log_prob", gens[i].log_prob}}.dump()
        << "\n";
  }
  std::ostringstream s;
  s << "examples " << examples.size() << "  beam " << beam << "\nBLEU " << scores.bleu << "  GLEU "
    << scores.gleu << "  token_acc " << scores.token_accuracy << "  xent " << *scores.cross_entropy
    << "\n";
  emit(io, a.json, report, s.str());
  return kOk;
}

// ---------------------------------------------------------------------------

struct EncodeArgs {
  std::string ckpt;
  std::string data;
  std::string split = "test";
  std::string out;
  bool json = false;
};

int cmd_encode(const EncodeArgs& a, const Io& io) {
  const LoadedModel lm = load_model(a.ckpt);
  const fs::path data_dir(a.data);
  check_vocab(lm, data_dir);
  const std::vector<EditExample> examples =
      load_jsonl(split_path(data_dir, a.split), load_options(lm.config.data));
  RepresentationFile file;
  file.rows = extract_representations(*lm.model, examples);
  file.checkpoint_hash = lm.hash;
  file.extra = {{"variant", std::string(variant_name(lm.model->config().variant))},
                {"split", a.split}};
  write_representations(a.out, file);
  const json header = {{"n", file.rows.rows()},
                       {"d", file.rows.cols()},
                       {"checkpoint_hash", lm.hash},
                       {"file", a.out},
                       {"file_hash", hash_file(a.out)}};
  std::ostringstream s;
  s << "wrote " << file.rows.rows() << " x " << file.rows.cols() << " to " << a.out << "\n";
  emit(io, a.json, header, s.str());
  return kOk;
}

// ---------------------------------------------------------------------------

struct ProbeArgs {
  std::string ckpt;
  std::string data;
  std::string depths;
  std::string config;
  std::string out;
  bool json = false;
};

std::string matrix_hash(const nn::Matrix<double>& m) {
  return to_hex(fnv1a64(std::string_view(reinterpret_cast<const char*>(m.data()),
                                         sizeof(double) * static_cast<std::size_t>(m.size()))));
}

int cmd_probe(const ProbeArgs& a, const Io& io) {
  const LoadedModel lm = load_model(a.ckpt);
  RunConfig config = lm.config;
  if (!a.config.empty()) {
    const RunConfig override_cfg = load_run_config(a.config);
    config.probe = override_cfg.probe;
    config.depths = override_cfg.depths;
  }
  if (!a.depths.empty()) config.depths = parse_int_list(a.depths, "--depths");
  for (int d : config.depths)
    if (d < 0) throw ConfigError("--depths must be non-negative");

  const fs::path data_dir(a.data);
  check_vocab(lm, data_dir);
  const LoadOptions opts = load_options(config.data);
  const std::vector<EditExample> train = load_jsonl(data_dir / "train.jsonl", opts);
  const std::vector<EditExample> valid = load_jsonl(data_dir / "valid.jsonl", opts);
  const std::vector<EditExample> test = load_jsonl(data_dir / "test.jsonl", opts);

  const nn::Matrix<double> xtr = extract_representations(*lm.model, train);
  const nn::Matrix<double> xva = extract_representations(*lm.model, valid);
  const nn::Matrix<double> xte = extract_representations(*lm.model, test);
  const ProbeData data = make_probe_data(xtr, train, xva, valid, xte, test, config.probe.mode);
  const DepthSweep sweep = depth_sweep(data, config.depths, config.probe);

  const std::string title = std::string(variant_name(lm.model->config().variant)) + " probe accuracy";
  json report = sweep.to_json();
  report["timestamp"] = timestamp();
  report["checkpoint"] = a.ckpt;
  report["checkpoint_hash"] = lm.hash;
  report["variant"] = std::string(variant_name(lm.model->config().variant));
  report["config"] = to_json(config);
  report["representation"] = {{"dim", xtr.cols()},
                              {"kind", "MAP"},
                              {"splits", "training corpus splits"},
                              {"sizes", {{"train", xtr.rows()}, {"valid", xva.rows()}, {"test", xte.rows()}}},
                              {"hash", matrix_hash(xtr) + ":" + matrix_hash(xva) + ":" + matrix_hash(xte)}};
  if (!a.out.empty()) {
    const fs::path out(a.out);
    make_dir(out);
    write_text(out / "config.toml", to_toml(config));
    write_json(out / "probe_report.json", report);
    write_text(out / "probe_depth.svg", render_depth_svg(sweep, title));
  }
  std::ostringstream s;
  for (const ProbeResult& r : sweep.results)
    s << "depth " << r.depth << "  train " << r.train_accuracy << "  valid " << r.valid_accuracy
      << "  test " << r.test_accuracy << "\n";
  emit(io, a.json, report, s.str());
  return kOk;
}

// ---------------------------------------------------------------------------

struct ScoreArgs {
  std::string src;
  std::string hyp;
  std::string ref;
  bool json = false;
};

int cmd_score(const ScoreArgs& a, const Io& io) {
  const std::vector<TokenSeq> srcs = read_token_file(a.src);
  const std::vector<TokenSeq> hyps = read_token_file(a.hyp);
  const std::vector<TokenSeq> refs = read_token_file(a.ref);
  if (srcs.size() != hyps.size() || hyps.size() != refs.size())
    throw FormatError("source, hypothesis and reference files differ in length (" +
                      std::to_string(srcs.size()) + ", " + std::to_string(hyps.size()) + ", " +
                      std::to_string(refs.size()) + ")");
  const ScoreReport r = score_corpus(srcs, hyps, refs);
  std::ostringstream s;
  s << "BLEU " << r.bleu << "  GLEU " << r.gleu << "  token_acc " << r.token_accuracy << "\n";
  emit(io, a.json, r.to_json(), s.str());
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const Io io{out, err};
  CLI::App app{"Edit representation learning toolkit"};
  app.name("eve");
  app.require_subcommand(1);
  app.footer("Training configuration (TOML) defaults:\n\n" + default_config_text());

  GenDataArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-data", "Generate a labeled synthetic edit corpus");
  gen_cmd->add_option("--n", gen.n, "Number of examples")->capture_default_str();
  gen_cmd->add_option("--classes", gen.classes, "Comma-separated rule classes (default: all)");
  gen_cmd->add_option("--seed", gen.seed, "Seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--ratios", gen.ratios, "train,valid,test fractions")->capture_default_str();
  gen_cmd->add_option("--base-vocab", gen.base_vocab, "Lowercase word types used")->capture_default_str();
  gen_cmd->add_flag("--json", gen.json, "Print JSON to stdout");

  AlignArgs al;
  CLI::App* align_cmd = app.add_subcommand("align", "Show the token alignment of edits");
  align_cmd->add_option("--src", al.src, "Source sentence (whitespace tokenized)");
  align_cmd->add_option("--tgt", al.tgt, "Target sentence (whitespace tokenized)");
  align_cmd->add_option("--data", al.data, "JSONL corpus to align");
  align_cmd->add_flag("--stats", al.stats, "Print corpus edit statistics");
  align_cmd->add_flag("--json", al.json, "Print JSON to stdout");

  TrainArgs tr;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--config", tr.config, "TOML run configuration");
  train_cmd->add_option("--variant", tr.variant, "EVE, YIN or GUU (overrides the config)");
  train_cmd->add_option("--data", tr.data, "Corpus directory (overrides [data].dir)");
  train_cmd->add_option("--out", tr.out, "Output directory")->required();
  train_cmd->add_option("--label", tr.label, "Label recorded in the report");
  train_cmd->add_flag("--resume", tr.resume, "Continue from <out>/last.ckpt");
  train_cmd->add_option("--halt-after-epochs", tr.halt_after, "Stop after this many epochs");
  train_cmd->add_flag("--quiet", tr.quiet, "No per-epoch log");
  train_cmd->add_flag("--json", tr.json, "Print the report JSON to stdout");
  train_cmd->footer("Configuration defaults:\n\n" + default_config_text());

  EvalArgs ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Beam-decode and score a split");
  eval_cmd->add_option("--ckpt", ev.ckpt, "Checkpoint")->required();
  eval_cmd->add_option("--data", ev.data, "Corpus directory")->required();
  eval_cmd->add_option("--split", ev.split, "train, valid or test")->capture_default_str();
  eval_cmd->add_option("--beam", ev.beam, "Beam width (default: model config)");
  eval_cmd->add_option("--max-len", ev.max_len, "Maximum output length (default: model config)");
  eval_cmd->add_option("--out", ev.out, "Output directory for report and hypotheses");
  eval_cmd->add_flag("--json", ev.json, "Print the report JSON to stdout");

  EncodeArgs en;
  CLI::App* encode_cmd = app.add_subcommand("encode", "Write MAP edit representations");
  encode_cmd->add_option("--ckpt", en.ckpt, "Checkpoint")->required();
  encode_cmd->add_option("--data", en.data, "Corpus directory")->required();
  encode_cmd->add_option("--split", en.split, "train, valid or test")->capture_default_str();
  encode_cmd->add_option("--out", en.out, "Representation file")->required();
  encode_cmd->add_flag("--json", en.json, "Print the header JSON to stdout");

  ProbeArgs pr;
  CLI::App* probe_cmd = app.add_subcommand("probe", "Train MLP probes on frozen representations");
  probe_cmd->add_option("--ckpt", pr.ckpt, "Checkpoint")->required();
  probe_cmd->add_option("--data", pr.data, "Labeled corpus directory")->required();
  probe_cmd->add_option("--depths", pr.depths, "Comma-separated depths (default: config)");
  probe_cmd->add_option("--config", pr.config, "TOML file whose [probe] section overrides");
  probe_cmd->add_option("--out", pr.out, "Output directory for report and plot");
  probe_cmd->add_flag("--json", pr.json, "Print the report JSON to stdout");

  ScoreArgs sc;
  CLI::App* score_cmd = app.add_subcommand("score", "Score hypotheses against references");
  score_cmd->add_option("--src", sc.src, "Source file")->required();
  score_cmd->add_option("--hyp", sc.hyp, "Hypothesis file")->required();
  score_cmd->add_option("--ref", sc.ref, "Reference file")->required();
  score_cmd->add_flag("--json", sc.json, "Print JSON to stdout");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen_data(gen, io);
    if (*align_cmd) return cmd_align(al, io);
    if (*train_cmd) return cmd_train(tr, io);
    if (*eval_cmd) return cmd_eval(ev, io);
    if (*encode_cmd) return cmd_encode(en, io);
    if (*probe_cmd) return cmd_probe(pr, io);
    if (*score_cmd) return cmd_score(sc, io);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const VocabMismatchError& e) {
    err << "error: " << e.what() << "\n";
    return kVocabMismatch;
  } catch (const LabelError& e) {
    err << "error: " << e.what() << "\n";
    return kLabels;
  } catch (const NonFiniteError& e) {
    err << "error: " << e.what() << "\n";
    return kDiverged;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace eve::cli
