#include <gtest/gtest.h>

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "denn/checkpoint.hpp"
#include "denn/datastore.hpp"
#include "support/temp_dir.hpp"

using nlohmann::json;
using testing_support::TempDir;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = denn::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

const char* kSmallConfig =
    "num_classes = 6\n"
    "num_clusters = 2\n"
    "train_samples = 240\n"
    "valid_samples = 60\n"
    "test_samples = 60\n"
    "vocab_size = 80\n"
    "seed = 3\n"
    "learning_rate = 0.001\n"
    "max_iters = 40\n"
    "batch_size = 16\n"
    "hidden_dim = 16\n"
    "embed_dim = 8\n"
    "k = 10\n";

class Pipeline : public ::testing::Test {
 protected:
  void SetUp() override {
    std::ofstream(dir / "small.conf") << kSmallConfig;
    conf = (dir / "small.conf").string();
  }
  std::string p(const std::string& name) const { return (dir / name).string(); }

  void run_pipeline(const std::string& prefix) {
    ASSERT_EQ(cli({"--config", conf, "--out", p(prefix + "data"), "gen-data"}).code, 0);
    auto r = cli({"--config", conf, "--out", p(prefix + "model.bin"), "train", "--data",
                  p(prefix + "data"), "--last", p(prefix + "last.bin")});
    ASSERT_EQ(r.code, 0) << r.err;
    r = cli({"--config", conf, "--out", p(prefix + "store.bin"), "build-store", "--model",
             p(prefix + "model.bin"), "--train", p(prefix + "data/train.jsonl")});
    ASSERT_EQ(r.code, 0) << r.err;
    r = cli({"--config", conf, "--out", p(prefix + "pred.jsonl"), "predict", "--model",
             p(prefix + "model.bin"), "--store", p(prefix + "store.bin"), "--test",
             p(prefix + "data/test.jsonl")});
    ASSERT_EQ(r.code, 0) << r.err;
    r = cli({"--out", p(prefix + "metrics.json"), "eval", "--predictions", p(prefix + "pred.jsonl"),
             "--gold", p(prefix + "data/test.jsonl"), "--train", p(prefix + "data/train.jsonl")});
    ASSERT_EQ(r.code, 0) << r.err;
    eval_stdout = r.out;
  }

  TempDir dir;
  std::string conf;
  std::string eval_stdout;
};

}  // namespace

TEST_F(Pipeline, EndToEndProducesAllArtifacts) {
  run_pipeline("a/");
  for (const char* f : {"a/data/train.jsonl", "a/data/valid.jsonl", "a/data/test.jsonl",
                        "a/data/manifest.json", "a/model.bin", "a/model.bin.history.jsonl",
                        "a/model.bin.manifest.json", "a/last.bin", "a/store.bin",
                        "a/store.bin.manifest.json", "a/pred.jsonl", "a/metrics.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }

  const auto store = denn::load_datastore(dir / "a/store.bin");
  EXPECT_EQ(store.size(), 240u);
  EXPECT_EQ(store.dim(), 8u);

  std::ifstream history(dir / "a/model.bin.history.jsonl");
  std::string line;
  std::size_t records = 0;
  while (std::getline(history, line)) {
    const auto j = json::parse(line);
    EXPECT_TRUE(j.contains("bce") && j.contains("con") && j.contains("total") &&
                j.contains("valid_micro_f1"));
    ++records;
  }
  EXPECT_EQ(records, 40u);

  std::ifstream pred(dir / "a/pred.jsonl");
  std::getline(pred, line);
  const auto header = json::parse(line);
  EXPECT_EQ(header["format"], "denn-predictions");
  EXPECT_EQ(header["num_classes"], 6);
  std::getline(pred, line);
  const auto rec = json::parse(line);
  for (const char* key : {"id", "y_clf", "y_knn", "high_conf", "lambda", "y_final", "predicted",
                          "neighbors"}) {
    EXPECT_TRUE(rec.contains(key)) << key;
  }
  EXPECT_EQ(rec["neighbors"].size(), 10u);
  EXPECT_GE(rec["lambda"].get<double>(), 0.0);
  EXPECT_LE(rec["lambda"].get<double>(), 1.0);

  const auto metrics = read_json(dir / "a/metrics.json");
  EXPECT_EQ(metrics["num_samples"], 60);
  EXPECT_EQ(metrics["groups"].size(), 4u);
  EXPECT_NE(eval_stdout.find("micro"), std::string::npos);

  const auto manifest = read_json(dir / "a/model.bin.manifest.json");
  EXPECT_EQ(manifest["command"], "train");
  EXPECT_EQ(manifest["seed"], 3);
  EXPECT_EQ(manifest["config"]["learning_rate"], "0.001");
  EXPECT_TRUE(manifest["artifacts"].contains("model"));
  EXPECT_TRUE(manifest["artifacts"].contains("last"));
  EXPECT_TRUE(manifest.contains("started_at") && manifest.contains("finished_at"));
}

TEST_F(Pipeline, RerunIsBitIdentical) {
  run_pipeline("a/");
  run_pipeline("b/");
  for (const char* f : {"data/train.jsonl", "data/test.jsonl", "model.bin", "last.bin",
                        "model.bin.history.jsonl", "store.bin", "pred.jsonl", "metrics.json"}) {
    EXPECT_EQ(slurp(dir / (std::string("a/") + f)), slurp(dir / (std::string("b/") + f))) << f;
  }
}

TEST_F(Pipeline, ResumeFromLastMatchesLongerRun) {
  ASSERT_EQ(cli({"--config", conf, "--out", p("data"), "gen-data"}).code, 0);
  std::ofstream(dir / "twenty.conf") << kSmallConfig << "max_iters = 20\neval_interval = 1000\n";
  std::ofstream(dir / "forty.conf") << kSmallConfig << "eval_interval = 1000\n";
  ASSERT_EQ(cli({"--config", p("twenty.conf"), "--out", p("m20.bin"), "train", "--train",
                 p("data/train.jsonl"), "--last", p("l20.bin")}).code, 0);
  ASSERT_EQ(cli({"--config", p("twenty.conf"), "--out", p("m40r.bin"), "train", "--train",
                 p("data/train.jsonl"), "--resume", p("l20.bin"), "--last", p("l40r.bin")}).code, 0);
  ASSERT_EQ(cli({"--config", p("forty.conf"), "--out", p("m40.bin"), "train", "--train",
                 p("data/train.jsonl"), "--last", p("l40.bin")}).code, 0);
  EXPECT_EQ(denn::load_checkpoint(dir / "l40r.bin"), denn::load_checkpoint(dir / "l40.bin"));
}

TEST_F(Pipeline, EvalOfGoldAgainstItselfIsPerfect) {
  ASSERT_EQ(cli({"--config", conf, "--out", p("data"), "gen-data"}).code, 0);
  const auto r = cli({"--out", p("m.json"), "eval", "--predictions", p("data/test.jsonl"),
                      "--gold", p("data/test.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = read_json(dir / "m.json");
  EXPECT_EQ(m["micro"]["f1"], 1.0);
  EXPECT_EQ(m["macro"]["f1"], 1.0);
}

TEST_F(Pipeline, EvalWithExplicitThresholds) {
  ASSERT_EQ(cli({"--config", conf, "--out", p("data"), "gen-data"}).code, 0);
  const auto r = cli({"--out", p("m.json"), "eval", "--predictions", p("data/test.jsonl"),
                      "--gold", p("data/test.jsonl"), "--train", p("data/train.jsonl"),
                      "--thresholds", "100000,0"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto groups = read_json(dir / "m.json")["groups"];
  ASSERT_EQ(groups.size(), 3u);
  EXPECT_EQ(groups[0]["num_labels"], 0);
  EXPECT_EQ(groups[1]["num_labels"], 6);
}

TEST_F(Pipeline, AblateWritesOneRowPerModeAndVariant) {
  ASSERT_EQ(cli({"--config", conf, "--out", p("data"), "gen-data"}).code, 0);
  std::ofstream(dir / "abl.conf") << kSmallConfig
                                  << "max_iters = 15\nsweep_k = 1,5\nsweep_gamma = 0.6\n"
                                     "sweep_store_fraction = 0.5,1\n";
  const auto r = cli({"--config", p("abl.conf"), "--out", p("abl"), "ablate", "--data", p("data")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_json(dir / "abl/ablation.json");
  std::set<std::string> modes, variants, sections;
  for (const auto& row : rows) {
    sections.insert(row["section"]);
    if (row["section"] == "modes") {
      modes.insert(row["mode"]);
      variants.insert(row["variant"]);
    }
    EXPECT_TRUE(row["micro"].contains("f1"));
    EXPECT_TRUE(row["macro"].contains("f1"));
  }
  EXPECT_EQ(modes, (std::set<std::string>{"classifier_only", "knn_only", "fixed_lambda", "denn"}));
  EXPECT_EQ(variants, (std::set<std::string>{"dcl", "ucl", "scl", "wscl"}));
  EXPECT_EQ(sections, (std::set<std::string>{"modes", "sweep_k", "sweep_gamma",
                                             "sweep_store_fraction"}));
  EXPECT_EQ(rows.size(), 7u + 2u + 1u + 2u);
  EXPECT_TRUE(fs::exists(dir / "abl/ablation.txt"));
  EXPECT_TRUE(fs::exists(dir / "abl/manifest.json"));
}

TEST(Cli, GradcheckPassesWithDefaults) {
  const auto r = cli({"gradcheck"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("max relative error"), std::string::npos);
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  const auto relu = cli({"--seed", "99", "gradcheck", "--activation", "relu", "--variant", "wscl"});
  EXPECT_EQ(relu.code, 0) << relu.out;
}

TEST(Cli, ErrorsHaveDistinctExitCodes) {
  TempDir dir;
  EXPECT_EQ(cli({}).code, denn::cli::kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, denn::cli::kExitUsage);
  EXPECT_EQ(cli({"build-store", "--out", "x"}).code, denn::cli::kExitUsage);

  const auto missing = cli({"--out", (dir / "s.bin").string(), "build-store", "--model",
                            (dir / "nope.bin").string(), "--train", (dir / "t.jsonl").string()});
  EXPECT_EQ(missing.code, 4);
  EXPECT_NE(missing.err.find("nope.bin"), std::string::npos);

  std::ofstream(dir / "bad.conf") << "this line is broken\n";
  EXPECT_EQ(cli({"--config", (dir / "bad.conf").string(), "--out", (dir / "d").string(), "gen-data"}).code, 6);
  std::ofstream(dir / "typo.conf") << "learnin_rate = 0.1\n";
  const auto typo = cli({"--config", (dir / "typo.conf").string(), "--out", (dir / "d").string(), "gen-data"});
  EXPECT_EQ(typo.code, 6);
  EXPECT_NE(typo.err.find("learnin_rate"), std::string::npos);

  std::ofstream(dir / "corrupt.bin") << "not a checkpoint";
  std::ofstream(dir / "t.jsonl") << "{\"num_classes\":2,\"vocab_size\":3}\n";
  EXPECT_EQ(cli({"--out", (dir / "s.bin").string(), "build-store", "--model",
                 (dir / "corrupt.bin").string(), "--train", (dir / "t.jsonl").string()}).code, 5);

  EXPECT_EQ(cli({"gen-data"}).code, 2);
}

TEST(Cli, DimensionMismatchExitCode) {
  TempDir dir;
  std::ofstream(dir / "a.conf") << kSmallConfig << "max_iters = 2\n";
  std::ofstream(dir / "b.conf") << kSmallConfig << "num_classes = 8\n";
  ASSERT_EQ(cli({"--config", (dir / "a.conf").string(), "--out", (dir / "a").string(), "gen-data"}).code, 0);
  ASSERT_EQ(cli({"--config", (dir / "b.conf").string(), "--out", (dir / "b").string(), "gen-data"}).code, 0);
  ASSERT_EQ(cli({"--config", (dir / "a.conf").string(), "--out", (dir / "m.bin").string(), "train",
                 "--train", (dir / "a/train.jsonl").string()}).code, 0);
  const auto r = cli({"--out", (dir / "s.bin").string(), "build-store", "--model",
                      (dir / "m.bin").string(), "--train", (dir / "b/train.jsonl").string()});
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, DefaultPipelineWithinBudget) {
  TempDir dir;
  const std::string conf = DENN_SOURCE_DIR "/configs/default.conf";
  const auto d = [&](const std::string& f) { return (dir / f).string(); };
  const auto start = std::chrono::steady_clock::now();
  ASSERT_EQ(cli({"--config", conf, "--out", d("data"), "gen-data"}).code, 0);
  ASSERT_EQ(cli({"--config", conf, "--out", d("m.bin"), "train", "--data", d("data")}).code, 0);
  ASSERT_EQ(cli({"--config", conf, "--out", d("s.bin"), "build-store", "--model", d("m.bin"),
                 "--train", d("data/train.jsonl")}).code, 0);
  ASSERT_EQ(cli({"--config", conf, "--out", d("p.jsonl"), "predict", "--model", d("m.bin"),
                 "--store", d("s.bin"), "--test", d("data/test.jsonl")}).code, 0);
  ASSERT_EQ(cli({"--out", d("e.json"), "eval", "--predictions", d("p.jsonl"), "--gold",
                 d("data/test.jsonl")}).code, 0);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(seconds, 60.0);
  const auto m = read_json(dir / "e.json");
  EXPECT_GT(m["micro"]["f1"].get<double>(), 0.5);
}
