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

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "eve/alignment.hpp"
#include "eve/corpus.hpp"
#include "eve/hash.hpp"
#include "json.hpp"
#include "test_util.hpp"

namespace eve {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
  int code;
  std::string out;
  std::string err;
  json j() const { return json::parse(out); }
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

json strip_timestamp(json j) {
  j.erase("timestamp");
  return j;
}

constexpr const char* kTinyConfig = R"(seed = 3
[data]
max_len = 60
[model]
d_emb = 8
d_h = 8
d_z = 4
beam_width = 2
max_decode_len = 30
[training]
batch_size = 16
lr = 5e-3
pretrain_max_epochs = 2
epochs = 2
single_stage_max_epochs = 2
[probe]
depths = [0, 1]
hidden = 8
epochs = 5
)";

// A small generated corpus and a trained tiny model shared by most tests.
class CliTest : public ::testing::Test {
 protected:
  static fs::path root_;

  static void SetUpTestSuite() {
    root_ = testing::temp_dir("cli");
    ASSERT_EQ(run({"gen-data", "--n", "120", "--seed", "5", "--out", (root_ / "data").string()}).code, 0);
    spit(root_ / "tiny.toml", kTinyConfig);
    for (const char* v : {"EVE", "YIN"}) {
      const Outcome r = run({"train", "--config", (root_ / "tiny.toml").string(), "--variant", v, "--data",
                         (root_ / "data").string(), "--out", (root_ / v).string(), "--quiet"});
      ASSERT_EQ(r.code, 0) << r.err;
    }
  }
  static fs::path data() { return root_ / "data"; }
  static std::string ckpt(const char* v) { return (root_ / v / "best.ckpt").string(); }
};

fs::path CliTest::root_;

TEST(CliGenData, DeterministicAndStats) {
  const fs::path d = testing::temp_dir("cli_gen");
  for (const char* sub : {"a", "b"})
    ASSERT_EQ(run({"gen-data", "--n", "100", "--seed", "1", "--out", (d / sub).string()}).code, 0);
  for (const char* f : {"train.jsonl", "valid.jsonl", "test.jsonl", "stats.json", "gen_config.json"})
    EXPECT_EQ(slurp(d / "a" / f), slurp(d / "b" / f)) << f;
  const json stats = json::parse(slurp(d / "a" / "stats.json"));
  for (const char* split : {"train", "valid", "test"}) {
    const std::vector<EditExample> ex = load_jsonl(d / "a" / (std::string(split) + ".jsonl"), {0, 1000});
    const EditStats s = edit_stats(align_all(ex));
    const json& j = stats.at(split);
    EXPECT_EQ(j.at("size").get<std::size_t>(), s.size);
    EXPECT_DOUBLE_EQ(j.at("frac_only_insert").get<double>(), s.frac_only_insert);
    EXPECT_DOUBLE_EQ(j.at("frac_only_delete").get<double>(), s.frac_only_delete);
    EXPECT_DOUBLE_EQ(j.at("frac_only_replace").get<double>(), s.frac_only_replace);
    EXPECT_DOUBLE_EQ(j.at("mean_length").get<double>(), s.mean_length);
  }
}

TEST(CliGenData, SingleClass) {
  const fs::path d = testing::temp_dir("cli_gen_drop");
  ASSERT_EQ(run({"gen-data", "--n", "50", "--classes", "DROP_TOKEN", "--out", d.string()}).code, 0);
  for (const char* f : {"train.jsonl", "valid.jsonl", "test.jsonl"})
    for (const EditExample& e : load_jsonl(d / f, {0, 1000})) EXPECT_EQ(e.labels, std::vector<std::string>{"DROP_TOKEN"});
}

TEST(CliUsage, ExitCodes) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run({"gen-data", "--n", "ten", "--out", "x"}).code, cli::kUsage);
  EXPECT_EQ(run({"gen-data", "--bogus", "--out", "x"}).code, cli::kUsage);
  EXPECT_EQ(run({"gen-data", "--n", "10"}).code, cli::kUsage);
  EXPECT_EQ(run({"gen-data", "--n", "10", "--classes", "NOPE", "--out", testing::temp_dir("cli_nope").string()}).code,
            cli::kUsage);
  const Outcome help = run({"--help"});
  EXPECT_EQ(help.code, cli::kOk);
  EXPECT_NE(help.out.find("d_h = 64"), std::string::npos);
}

TEST(CliUsage, ConfigErrors) {
  const fs::path d = testing::temp_dir("cli_cfg");
  spit(d / "unknown.toml", "[model]\nd_hh = 3\n");
  spit(d / "syntax.toml", "[model\n");
  spit(d / "type.toml", "[model]\nd_h = \"wide\"\n");
  spit(d / "range.toml", "[model]\nd_h = 0\n");
  spit(d / "decay.toml", "[training]\nlr_decay = 1.5\n");
  for (const char* f : {"unknown.toml", "syntax.toml", "type.toml", "range.toml", "decay.toml"}) {
    const Outcome r = run({"train", "--config", (d / f).string(), "--out", (d / "o").string()});
    EXPECT_EQ(r.code, cli::kUsage) << f << ": " << r.err;
    EXPECT_NE(r.err.find("error"), std::string::npos);
  }
  EXPECT_NE(run({"train", "--config", (d / "unknown.toml").string(), "--out", "o"}).err.find("model.d_hh"),
            std::string::npos);
  EXPECT_EQ(run({"train", "--config", (d / "absent.toml").string(), "--out", "o"}).code, cli::kIo);
  EXPECT_EQ(run({"train", "--data", (d / "nodata").string(), "--out", (d / "o").string()}).code, cli::kIo);
  EXPECT_EQ(run({"train", "--variant", "VAE", "--out", (d / "o").string()}).code, cli::kUsage);
}

TEST(CliAlign, PairAndJson) {
  const Outcome r = run({"align", "--src", "a b c", "--tgt", "a x c", "--json"});
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_EQ(j.at("tags"), (json{"=", "<=>", "="}));
  const Outcome text = run({"align", "--src", "a b", "--tgt", "a"});
  EXPECT_NE(text.out.find("-"), std::string::npos);
}

TEST(CliScore, FilesAndMismatch) {
  const fs::path d = testing::temp_dir("cli_score");
  spit(d / "src.txt", "the cat sat .\n");
  spit(d / "ref.txt", "the cat sits .\n");
  spit(d / "hyp.txt", "the cat sits .\n");
  spit(d / "two.txt", "a\nb\n");
  const Outcome r = run({"score", "--src", (d / "src.txt").string(), "--hyp", (d / "hyp.txt").string(), "--ref",
                     (d / "ref.txt").string(), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_DOUBLE_EQ(r.j().at("bleu").get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(r.j().at("gleu").get<double>(), 1.0);
  EXPECT_EQ(run({"score", "--src", (d / "src.txt").string(), "--hyp", (d / "two.txt").string(), "--ref",
                 (d / "ref.txt").string()})
                .code,
            cli::kIo);
}

TEST_F(CliTest, YinReportHasNoKl) {
  const json report = json::parse(slurp(root_ / "YIN" / "report.json"));
  ASSERT_EQ(report.at("stages").size(), 1u);
  for (const json& e : report.at("stages")[0].at("epochs")) {
    EXPECT_FALSE(e.at("train").contains("kl"));
    EXPECT_FALSE(e.at("valid").contains("kl"));
    EXPECT_FALSE(e.contains("kl_weight_end"));
  }
  const json eve = json::parse(slurp(root_ / "EVE" / "report.json"));
  ASSERT_EQ(eve.at("stages").size(), 2u);
  EXPECT_TRUE(eve.at("stages")[1].at("epochs")[0].at("train").contains("kl"));
  EXPECT_NE(slurp(root_ / "EVE" / "config.toml").find("variant = 'EVE'"), std::string::npos);
}

TEST_F(CliTest, EvalReportAndBeamWidth) {
  const fs::path out = testing::temp_dir("cli_eval");
  const Outcome b1 = run({"eval", "--ckpt", ckpt("EVE"), "--data", data().string(), "--beam", "1", "--json"});
  const Outcome b4 = run({"eval", "--ckpt", ckpt("EVE"), "--data", data().string(), "--beam", "4", "--json", "--out",
                      out.string()});
  ASSERT_EQ(b1.code, 0) << b1.err;
  ASSERT_EQ(b4.code, 0) << b4.err;
  const json j1 = b1.j(), j4 = b4.j();
  EXPECT_GE(j4.at("output_log_likelihood").get<double>(), j1.at("output_log_likelihood").get<double>() - 1e-9);
  EXPECT_EQ(j4.at("checkpoint_hash"), hash_file(ckpt("EVE")));
  EXPECT_EQ(j4.at("config").at("model").at("d_h"), 8);
  for (const char* k : {"bleu", "gleu", "token_accuracy", "cross_entropy"}) EXPECT_TRUE(j4.at("scores").contains(k));
  EXPECT_TRUE(fs::exists(out / "score_report.json"));
  EXPECT_TRUE(fs::exists(out / "hypotheses.jsonl"));
  EXPECT_TRUE(fs::exists(out / "config.toml"));
  EXPECT_EQ(strip_timestamp(json::parse(slurp(out / "score_report.json"))), strip_timestamp(j4));
}

TEST_F(CliTest, EvalVocabMismatch) {
  const fs::path other = testing::temp_dir("cli_other");
  ASSERT_EQ(run({"gen-data", "--n", "60", "--seed", "77", "--out", other.string()}).code, 0);
  const Outcome r = run({"eval", "--ckpt", ckpt("EVE"), "--data", other.string()});
  EXPECT_EQ(r.code, cli::kVocabMismatch);
  EXPECT_NE(r.err.find("vocabulary"), std::string::npos);
  EXPECT_EQ(run({"eval", "--ckpt", (root_ / "none.ckpt").string(), "--data", data().string()}).code, cli::kIo);
}

TEST_F(CliTest, ProbeSinglePointAndReproducible) {
  const Outcome a = run({"probe", "--ckpt", ckpt("EVE"), "--data", data().string(), "--depths", "0", "--json"});
  const Outcome b = run({"probe", "--ckpt", ckpt("EVE"), "--data", data().string(), "--depths", "0", "--json"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.j().at("curve").size(), 1u);
  EXPECT_EQ(strip_timestamp(a.j()), strip_timestamp(b.j()));
  const Outcome yin = run({"probe", "--ckpt", ckpt("YIN"), "--data", data().string(), "--json"});
  ASSERT_EQ(yin.code, 0) << yin.err;
  EXPECT_EQ(yin.j().at("labels"), a.j().at("labels"));
  EXPECT_EQ(yin.j().at("curve").size(), 2u);
}

TEST_F(CliTest, ProbeUnlabeledData) {
  const fs::path d = testing::temp_dir("cli_unlabeled");
  for (const char* f : {"train.jsonl", "valid.jsonl", "test.jsonl"}) {
    std::vector<EditExample> ex = load_jsonl(data() / f, {0, 1000});
    for (EditExample& e : ex) e.labels.clear();
    save_jsonl(d / f, ex);
  }
  const Outcome r = run({"probe", "--ckpt", ckpt("EVE"), "--data", d.string(), "--depths", "0"});
  EXPECT_EQ(r.code, cli::kLabels) << r.err;
}

TEST_F(CliTest, EncodeWritesRepresentations) {
  const fs::path out = testing::temp_dir("cli_encode") / "reps.bin";
  const Outcome r = run({"encode", "--ckpt", ckpt("EVE"), "--data", data().string(), "--split", "valid", "--out",
                     out.string(), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.j().at("d"), 4);
  EXPECT_EQ(r.j().at("file_hash"), hash_file(out));
}

TEST_F(CliTest, TrainingIsReproducibleAndResumable) {
  const fs::path d = testing::temp_dir("cli_repro");
  const std::string cfg = (root_ / "tiny.toml").string();
  const Outcome again = run({"train", "--config", cfg, "--variant", "EVE", "--data", data().string(), "--out",
                         (d / "again").string(), "--quiet"});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(slurp(d / "again" / "report.json"), slurp(root_ / "EVE" / "report.json"));
  EXPECT_EQ(hash_file(d / "again" / "best.ckpt"), hash_file(ckpt("EVE")));

  const std::vector<std::string> base = {"train", "--config", cfg, "--variant", "EVE", "--data", data().string(),
                                         "--out", (d / "split").string(), "--quiet"};
  std::vector<std::string> first = base;
  first.insert(first.end(), {"--halt-after-epochs", "3"});
  ASSERT_EQ(run(first).code, 0);
  std::vector<std::string> second = base;
  second.push_back("--resume");
  ASSERT_EQ(run(second).code, 0);
  EXPECT_EQ(slurp(d / "split" / "report.json"), slurp(root_ / "EVE" / "report.json"));
}

TEST(CliMemorised, SingleExampleScoresPerfectly) {
  const fs::path d = testing::temp_dir("cli_memo");
  const std::vector<EditExample> one = {{{"the", "cat", "sat", "on", "the", "mat", "."},
                                         {"the", "cat", "sat", "on", "a", "mat", "."},
                                         {"SYNONYM"}}};
  for (const char* f : {"train.jsonl", "valid.jsonl", "test.jsonl"}) save_jsonl(d / f, one);
  spit(d / "memo.toml", R"([model]
d_emb = 16
d_h = 16
d_z = 4
word_dropout = 0.0
[training]
lr = 1e-2
single_stage_max_epochs = 150
patience = 150
)");
  const Outcome t = run({"train", "--config", (d / "memo.toml").string(), "--variant", "YIN", "--data", d.string(),
                     "--out", (d / "run").string(), "--quiet"});
  ASSERT_EQ(t.code, 0) << t.err;
  const Outcome e = run({"eval", "--ckpt", (d / "run" / "best.ckpt").string(), "--data", d.string(), "--json"});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_DOUBLE_EQ(e.j().at("scores").at("bleu").get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(e.j().at("scores").at("gleu").get<double>(), 1.0);
  EXPECT_LT(e.j().at("scores").at("cross_entropy").get<double>(), 0.05);
}

}  // namespace
}  // namespace eve
