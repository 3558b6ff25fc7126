#include <gtest/gtest.h>

#include <sstream>

#include "test_util.hpp"

using namespace rse;

TEST(GenSynthetic, TinyCase) {
  const auto ds = gen_synthetic(1, 1, 1, 0);
  ASSERT_EQ(ds.train.size(), 1u);
  EXPECT_EQ(ds.train[0].chars, "A");
  EXPECT_EQ(ds.alphabet.symbols(), "A");
}

TEST(GenSynthetic, ProteinSizedAlphabet) {
  const auto ds = gen_synthetic(1000, 512, 20, 3);
  EXPECT_EQ(ds.train.size(), 1000u);
  EXPECT_EQ(ds.alphabet.symbols(), "ACDEFGHIKLMNPQRSTVWY");
  for (const auto& r : ds.train) {
    ASSERT_EQ(r.length(), 512u);
    for (char c : r.chars) ASSERT_TRUE(ds.alphabet.contains(c));
  }
  EXPECT_EQ(ds, gen_synthetic(1000, 512, 20, 3));
  EXPECT_NE(ds.train, gen_synthetic(1000, 512, 20, 4).train);
}

TEST(GenSynthetic, PrefixStableInN) {
  const auto small = gen_synthetic(10, 30, 4, 1), big = gen_synthetic(20, 30, 4, 1);
  EXPECT_TRUE(std::equal(small.train.begin(), small.train.end(), big.train.begin()));
}

TEST(GenSynthetic, Validation) {
  EXPECT_THROW(gen_synthetic(0, 5, 4, 0), ArgumentError);
  EXPECT_THROW(gen_synthetic(5, 0, 4, 0), ArgumentError);
  EXPECT_THROW(gen_synthetic(5, 5, 0, 0), ArgumentError);
  EXPECT_THROW(gen_synthetic(5, 5, 1000, 0), ArgumentError);
}

TEST(RunScaling, SmallSweepShapeAndCsv) {
  ScalingParams p;
  p.n = 200;
  p.length = 64;
  p.r = 32;
  p.repeats = 3;
  const std::vector<std::size_t> grid{100, 200, 400, 800};
  const auto run = run_scaling(ScalingAxis::n, grid, p);
  ASSERT_EQ(run.wall_times.size(), 4u);
  ASSERT_EQ(run.run_seconds.size(), 4u);
  for (const auto& secs : run.run_seconds) EXPECT_EQ(secs.size(), 3u);
  for (double t : run.wall_times) EXPECT_GT(t, 0.0);
  EXPECT_GT(run.fitted_slope, 0.5);
  EXPECT_LT(run.fitted_slope, 1.5);

  std::ostringstream csv;
  write_scaling_csv(csv, run);
  const auto text = csv.str();
  EXPECT_EQ(text.rfind("size,run,seconds\n", 0), 0u);
  EXPECT_NE(text.find("\n100,0,"), std::string::npos);
  EXPECT_NE(text.find("# axis=N slope="), std::string::npos);
}

TEST(RunScaling, Validation) {
  ScalingParams p;
  EXPECT_THROW(run_scaling(ScalingAxis::r, std::vector<std::size_t>{1, 2, 3}, p), ArgumentError);
  EXPECT_THROW(run_scaling(ScalingAxis::r, std::vector<std::size_t>{1, 2, 2, 3}, p), ArgumentError);
  EXPECT_EQ(parse_scaling_axis("L"), ScalingAxis::l);
  EXPECT_THROW(parse_scaling_axis("x"), ArgumentError);
}
