// Copyright 2026 The xpfn Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "xpfn/cli/commands.hpp"
#include "xpfn/common/binary_io.hpp"
#include "xpfn/common/rng.hpp"

namespace xpfn::cli {
namespace {

namespace fs = std::filesystem;

const char* kTinyConfig = R"(
generator.max_nodes = 6
generator.m_max = 4
generator.max_samples = 96
base.mlp_epochs = 200
base.mlp_lr = 1e-2
base.forest_trees = 20
shap.n_permutations = 20
explainer.embed_dim = 16
explainer.n_layers = 1
explainer.n_heads = 2
explainer.ffn_dim = 32
explainer.max_features = 4
explainer.steps = 20
explainer.restarts = 2
explainer.lr_min = 1e-3
explainer.lr_max = 3e-3
explainer.max_train_rows = 64
explainer.smooth_window = 5
benchmark.synthetic_tasks = 1
dag.tasks = 2
dag.max_features = 4
)";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("xpfn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  RunConfig config(const std::string& out = "out") const {
    RunConfig c;
    c.merge_text(kTinyConfig, "tiny");
    c.set("output_dir", (root_ / out).string());
    return c;
  }

  fs::path write_data(std::size_t n, bool with_prediction) const {
    Rng rng(3);
    std::string text = with_prediction ? "a,b,c,prediction\n" : "a,b,c,label\n";
    for (std::size_t i = 0; i < n; ++i) {
      double a = uniform(rng, -1, 1), b = uniform(rng, -1, 1), cc = uniform(rng, -1, 1);
      double last = with_prediction ? 1.0 / (1.0 + std::exp(-(2 * a - b))) : (a + 0.3 * b > 0 ? 1.0 : 0.0);
      text += format_double(a) + "," + format_double(b) + "," + format_double(cc) + "," + format_double(last) + "\n";
    }
    fs::path p = root_ / (with_prediction ? "pred.csv" : "labelled.csv");
    write_file_atomic(p, text);
    return p;
  }

  fs::path root_;
};

TEST(ConfigTest, DefaultsOverridesAndErrors) {
  RunConfig c;
  EXPECT_EQ(master_seed(c), 42u);
  c.merge_text("# comment\nseed = 7  # trailing\n\nexplainer.steps=5\n", "inline");
  EXPECT_EQ(master_seed(c), 7u);
  EXPECT_EQ(c.get_size("explainer.steps"), 5u);
  c.set("benchmark.k_shots=2, 4");
  EXPECT_EQ(c.get_size_list("benchmark.k_shots"), (std::vector<std::size_t>{2, 4}));
  EXPECT_THROW(c.set("no.such.key=1"), InvalidArgument);
  EXPECT_THROW(c.merge_text("seed\n", "inline"), InvalidArgument);
  c.set("seed=abc");
  EXPECT_THROW(master_seed(c), InvalidArgument);
  c.set("post.recenter=maybe");
  EXPECT_THROW(correction_config(c), InvalidArgument);
}

TEST(ConfigTest, OutputDirEnvironmentOverride) {
  ::setenv(kOutputDirEnv, "/tmp/from_env", 1);
  RunConfig c;
  ::unsetenv(kOutputDirEnv);
  EXPECT_EQ(output_dir(c), fs::path("/tmp/from_env"));
  EXPECT_EQ(pool_dir(c), fs::path("/tmp/from_env/pool"));
  EXPECT_EQ(output_dir(RunConfig()), fs::path("xpfn_out"));
}

TEST(CsvTest, RoundTripAndErrors) {
  CsvTable t{{"x", "y"}, Matrix::from_rows({{0.1, -2.5e-300}, {1.0 / 3.0, 7.0}})};
  CsvTable back = parse_csv(format_csv(t), "mem");
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.data, t.data);
  EXPECT_THROW(parse_csv("x,y\n1\n", "mem"), FormatError);
  EXPECT_THROW(parse_csv("x,y\n1,abc\n", "mem"), FormatError);
  EXPECT_THROW(parse_csv("", "mem"), FormatError);
  EXPECT_THROW(back.column("z"), InvalidArgument);
}

TEST_F(CliTest, GenerateIsWorkerCountIndependent) {
  RunConfig one = config("one"), four = config("four");
  cmd_generate(one, 3, 1);
  cmd_generate(four, 3, 4);
  for (const char* ext : {".bin", ".json"}) {
    std::string id = scm::pool_task_id(0) + ext;
    EXPECT_EQ(read_file(pool_dir(one) / id), read_file(pool_dir(four) / id));
  }
}

TEST_F(CliTest, GenerateZeroTasksGivesEmptyPool) {
  RunConfig c = config();
  auto stats = cmd_generate(c, 0, 1);
  EXPECT_EQ(stats.written, 0u);
  EXPECT_TRUE(fs::is_directory(pool_dir(c)));
  EXPECT_TRUE(scm::pool_list(pool_dir(c)).empty());
}

TEST_F(CliTest, FreshPoolValidatesAndCorruptionIsNamed) {
  RunConfig c = config();
  cmd_generate(c, 4, 1);
  ValidationReport good = validate_pool(pool_dir(c));
  EXPECT_TRUE(good.ok());
  fs::path victim = pool_dir(c) / (scm::pool_task_id(2) + ".bin");
  {
    std::fstream f(victim, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(24);
    f.put('\x7f');
  }
  ValidationReport bad = validate_pool(pool_dir(c));
  ASSERT_EQ(bad.failures(), 1u);
  for (const auto& chk : bad.checks) {
    if (!chk.ok) {
      EXPECT_EQ(chk.target, victim.string());
    }
  }
}

TEST_F(CliTest, MissingPrerequisitesNameTheSubcommand) {
  RunConfig c = config();
  try {
    cmd_train(c);
    FAIL() << "expected MissingPrerequisite";
  } catch (const MissingPrerequisite& e) {
    EXPECT_NE(std::string(e.what()).find("xpfn generate"), std::string::npos);
  }
  try {
    cmd_explain(c, write_data(5, true), root_ / "a.csv");
    FAIL() << "expected MissingPrerequisite";
  } catch (const MissingPrerequisite& e) {
    EXPECT_NE(std::string(e.what()).find("xpfn train"), std::string::npos);
  }
  EXPECT_THROW(cmd_dag_recover(c), MissingPrerequisite);
  EXPECT_THROW(cmd_shap(c, write_data(5, false), root_ / "none.bin", root_ / "s.csv"), MissingPrerequisite);
}

TEST_F(CliTest, TrainExplainAndCheckpointValidation) {
  RunConfig c = config();
  cmd_generate(c, 6, 1);
  cmd_train(c);
  EXPECT_TRUE(validate_checkpoint(checkpoint_path(c)).ok());

  CsvTable a = cmd_explain(c, write_data(5, true), root_ / "attr.csv");
  CsvTable back = read_csv(root_ / "attr.csv");
  EXPECT_EQ(back.header, (std::vector<std::string>{"feature_1", "feature_2", "feature_3", "base_value"}));
  ASSERT_EQ(back.data.rows(), 5u);
  EXPECT_EQ(back.data, a.data);
  // Efficiency against the emitted base value.
  CsvTable input = read_csv(root_ / "pred.csv");
  for (std::size_t i = 0; i < 5; ++i) {
    double s = back.data(i, 3) + back.data(i, 0) + back.data(i, 1) + back.data(i, 2);
    EXPECT_NEAR(s, input.data(i, 3), 1e-12);
  }

  std::string bytes = read_file(checkpoint_path(c));
  bytes[bytes.size() - 3] ^= 0x10;
  write_file_atomic(root_ / "broken.bin", bytes);
  EXPECT_FALSE(validate_checkpoint(root_ / "broken.bin").ok());
}

TEST_F(CliTest, FitBasePredictAndShap) {
  RunConfig c = config();
  fs::path data = write_data(40, false);
  cmd_fit_base(c, data, root_ / "base.bin");
  CsvTable pred = cmd_predict(c, data, root_ / "base.bin", root_ / "pred_out.csv");
  EXPECT_EQ(pred.header.back(), "prediction");
  CsvTable s = cmd_shap(c, data, root_ / "base.bin", root_ / "shap.csv");
  ASSERT_EQ(s.data.rows(), 40u);
  for (std::size_t i = 0; i < 40; ++i) {
    double total = s.data(i, 0) + s.data(i, 1) + s.data(i, 2) + s.data(i, 3);
    EXPECT_NEAR(total, pred.data(i, 3), 1e-9);
  }
}

TEST_F(CliTest, BenchmarkEmitsExactlyRequestedShots) {
  RunConfig c = config();
  c.set("benchmark.methods", "knn");
  c.set("benchmark.k_shots", "2,6");
  c.set("benchmark.base_kinds", "mlp");
  BenchmarkOutput out = cmd_benchmark(c);
  ASSERT_EQ(out.reports.size(), 2u);
  EXPECT_EQ(out.reports[0].k_shots, 2u);
  EXPECT_EQ(out.reports[1].k_shots, 6u);
  std::string csv = read_file(output_dir(c) / "benchmark.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST_F(CliTest, RerunsAreByteIdentical) {
  std::vector<std::string> files = {"explainer.bin", "train_loss.csv", "benchmark.csv", "benchmark.json",
                                    "benchmark_summary.csv", "dag_recovery.json", "dag_ged.csv", "attr.csv"};
  std::vector<std::string> first;
  for (const char* run : {"r1", "r2"}) {
    RunConfig c = config(run);
    c.set("benchmark.k_shots", "0,2");
    c.set("benchmark.base_kinds", "forest");
    cmd_generate(c, 5, 2);
    cmd_train(c);
    cmd_benchmark(c);
    cmd_dag_recover(c);
    cmd_explain(c, write_data(8, true), output_dir(c) / "attr.csv");
    for (std::size_t f = 0; f < files.size(); ++f) {
      std::string bytes = read_file(output_dir(c) / files[f]);
      if (first.size() < files.size()) {
        first.push_back(bytes);
      } else {
        EXPECT_EQ(bytes, first[f]) << files[f];
      }
    }
  }
}

TEST_F(CliTest, CommandLineExitCodes) {
  fs::path out = root_ / "cli";
  std::string out_s = out.string();
  std::vector<std::string> gen = {"xpfn", "-o", out_s, "--set", "generator.m_max=3", "generate", "-n", "2"};
  std::vector<char*> argv;
  for (auto& s : gen) argv.push_back(s.data());
  EXPECT_EQ(run_cli(static_cast<int>(argv.size()), argv.data()), 0);

  std::vector<std::string> val = {"xpfn", "-o", out_s, "validate", "--pool", (out / "pool").string()};
  argv.clear();
  for (auto& s : val) argv.push_back(s.data());
  EXPECT_EQ(run_cli(static_cast<int>(argv.size()), argv.data()), 0);

  std::vector<std::string> bad = {"xpfn", "--set", "bogus=1", "train"};
  argv.clear();
  for (auto& s : bad) argv.push_back(s.data());
  EXPECT_EQ(run_cli(static_cast<int>(argv.size()), argv.data()), 1);
}

}  // namespace
}  // namespace xpfn::cli
