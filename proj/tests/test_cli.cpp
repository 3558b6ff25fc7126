#include <gtest/gtest.h>

#include <cstdio>
#include <sys/wait.h>

#include "test_util.hpp"

using namespace rse;
using rse::testing::read_file;
using rse::testing::TempDir;
using rse::testing::write_file;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(RSE_CLI_PATH) + " " + args + " 2>/dev/null";
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return o;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) o.out.append(buf, n);
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string make_toy(const TempDir& dir) {
  const auto ds = rse::testing::toy_dna(40, 31);
  const auto path = dir / "toy.tsv";
  std::ofstream out(path);
  write_records(out, ds.train, ds.class_names, DatasetFormat::tsv);
  return path.string();
}

}  // namespace

TEST(Cli, FlagOverridesConfigFileOverridesDefault) {
  TempDir dir("cli-prec");
  const auto data = make_toy(dir);
  write_file(dir / "run.cfg", "train=" + data + "\nd_max=3\nR=7\n");
  const auto from_file = run("sample --config " + (dir / "run.cfg").string());
  ASSERT_EQ(from_file.code, 0);
  EXPECT_EQ(from_file.out.rfind("RSE-BANK v1 strategy=BSS d_max=3 seed=0 R=7\n", 0), 0u) << from_file.out;
  const auto flagged = run("sample --config " + (dir / "run.cfg").string() + " --d-max 5 --seed 9");
  ASSERT_EQ(flagged.code, 0);
  EXPECT_EQ(flagged.out.rfind("RSE-BANK v1 strategy=BSS d_max=5 seed=9 R=7\n", 0), 0u) << flagged.out;
}

TEST(Cli, StagedWorkflowMatchesPipeline) {
  TempDir dir("cli-stages");
  const auto data = make_toy(dir);
  const std::string common = "--data " + data + " -R 24 --d-max 6 --gamma 0.1 --seed 2";
  ASSERT_EQ(run("sample " + common + " --out " + (dir / "bank.txt").string()).code, 0);
  ASSERT_EQ(run("embed " + common + " --bank " + (dir / "bank.txt").string() + " --out " + (dir / "train.emb").string()).code, 0);
  ASSERT_EQ(run("embed " + common + " --part test --out-format svmlight --bank " + (dir / "bank.txt").string() +
                " --out " + (dir / "test.emb").string()).code, 0);
  ASSERT_EQ(run("train --embedding " + (dir / "train.emb").string() + " --out " + (dir / "model.txt").string()).code, 0);
  const auto ev = run("eval --model " + (dir / "model.txt").string() + " --embedding " + (dir / "test.emb").string());
  ASSERT_EQ(ev.code, 0);
  const auto report = nlohmann::json::parse(ev.out);

  const auto pipe = run("pipeline " + common + " --out-dir " + (dir / "pipe").string());
  ASSERT_EQ(pipe.code, 0);
  const auto full = nlohmann::json::parse(pipe.out);
  EXPECT_EQ(report["accuracy"], full["evaluation"]["accuracy"]);
  EXPECT_EQ(read_file(dir / "bank.txt"), read_file(dir / "pipe" / "bank.txt"));
}

TEST(Cli, ExitCodesNameTheFailingStage) {
  TempDir dir("cli-codes");
  const auto data = make_toy(dir);
  EXPECT_EQ(run("pipeline --data /nonexistent/x.tsv").code, exit_code(Stage::ingest));
  write_file(dir / "bad.cfg", "colour=blue\n");
  EXPECT_EQ(run("pipeline --config " + (dir / "bad.cfg").string()).code, exit_code(Stage::config));
  EXPECT_EQ(run("pipeline --data " + data + " --strategy XYZ").code, exit_code(Stage::config));
  EXPECT_EQ(run("sample --data " + data + " --d-max 999").code, exit_code(Stage::sample));
  write_file(dir / "bank.txt", "RSE-BANK v1 strategy=RF d_max=3 seed=0 R=5\nA\n");
  EXPECT_EQ(run("embed --data " + data + " --bank " + (dir / "bank.txt").string()).code, exit_code(Stage::embed));
  EXPECT_EQ(run("eval --model /nonexistent/m --embedding /nonexistent/e").code, exit_code(Stage::eval));
  EXPECT_EQ(run("bench --grid 1,2").code, exit_code(Stage::bench));
  EXPECT_NE(run("").code, 0);
}

TEST(Cli, KernelCheckEmitsJsonLines) {
  TempDir dir("cli-kcheck");
  const auto data = make_toy(dir);
  const auto out = run("kernel-check --data " + data + " --strategy RF --gamma 0.1 --pairs 5 --grid 4,16 --r-ref 256");
  ASSERT_EQ(out.code, 0);
  std::istringstream lines(out.out);
  std::size_t n = 0;
  for (std::string line; std::getline(lines, line); ++n) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("R"));
    EXPECT_TRUE(j.contains("max_abs_error"));
    EXPECT_TRUE(j.contains("mean_abs_error"));
  }
  EXPECT_EQ(n, 2u);
}

TEST(Cli, GramPrintsMatrixAndEigenvalues) {
  TempDir dir("cli-gram");
  const auto data = make_toy(dir);
  const auto out = run("gram --data " + data + " --count 5 -R 32 --gamma 0.1");
  ASSERT_EQ(out.code, 0);
  EXPECT_NE(out.out.find("# min_eigenvalue="), std::string::npos);
  EXPECT_EQ(std::count(out.out.begin(), out.out.end(), '\n'), 6);
  const auto sub = run("gram --data " + data + " --count 5 --kind gaussian --gamma 0.1");
  EXPECT_EQ(sub.code, 0);
}

TEST(Cli, VariantsAndBench) {
  TempDir dir("cli-variants");
  const auto data = make_toy(dir);
  const auto v = run("variants --data " + data + " -R 16 --d-max 5 --seeds 1,2");
  ASSERT_EQ(v.code, 0);
  const auto j = nlohmann::json::parse(v.out);
  EXPECT_EQ(j["variants"].size(), 8u);
  const auto b = run("bench --axis r --grid 8,16,32,64 --n 20 --length 40 --repeats 1");
  ASSERT_EQ(b.code, 0);
  EXPECT_NE(b.out.find("# axis=R slope="), std::string::npos);
}
