#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "test_util.hpp"

using namespace rse;
using rse::testing::TempDir;

namespace {

RandomStringBank bank_of(std::vector<std::string> strings) {
  RandomStringBank b;
  b.config = {Strategy::rf, 10, 0};
  for (const auto& s : strings) b.lengths.push_back(s.size());
  b.strings = std::move(strings);
  return b;
}

std::vector<LabeledString> records_of(std::initializer_list<const char*> xs) {
  std::vector<LabeledString> out;
  int label = 0;
  for (const char* x : xs) out.push_back({x, label++ % 2});
  return out;
}

}  // namespace

TEST(Embed, SingleIdenticalString) {
  const auto recs = records_of({"ACGT"});
  const auto bank = bank_of({"ACGT"});
  EXPECT_EQ(embed(recs, bank, {FeatureMap::soft, 0.5}).values, std::vector<double>{1.0});
  EXPECT_EQ(embed(recs, bank, {FeatureMap::direct, 1.0}).values, std::vector<double>{0.0});
}

TEST(Embed, EntriesMatchScalarFeatureCalls) {
  const auto recs = records_of({"GATTACA", "ACGTACGT", "T"});
  const auto bank = bank_of({"GAT", "CCCC", "A", "TTAGG"});
  for (const FeatureParams p : {FeatureParams{FeatureMap::soft, 0.3}, FeatureParams{FeatureMap::direct, 1.0}}) {
    const auto z = embed(recs, bank, p);
    ASSERT_EQ(z.rows, 3u);
    ASSERT_EQ(z.cols, 4u);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(z.at(i, j), feature(recs[i].chars, bank.strings[j], p) / 2.0);
    EXPECT_EQ(z.labels, (std::vector<int>{0, 1, 0}));
  }
}

TEST(Embed, FeatureRanges) {
  const auto ds = rse::testing::toy_dna(20, 1);
  const auto bank = build_bank(ds, {Strategy::rf, 10, 0}, 64);
  const auto sf = embed(ds.train, bank, {FeatureMap::soft, 0.2});
  for (double v : sf.values) {
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0 / 8.0);
  }
  const auto df = embed(ds.train, bank, {FeatureMap::direct, 1.0});
  for (std::size_t i = 0; i < df.rows; ++i)
    for (std::size_t j = 0; j < df.cols; ++j) {
      EXPECT_GE(df.at(i, j), 0.0);
      EXPECT_LE(df.at(i, j) * 8.0, static_cast<double>(std::max(ds.train[i].length(), bank.strings[j].size())));
    }
}

TEST(Embed, InnerProductEqualsDirectKernelSum) {
  const auto ds = rse::testing::toy_dna(30, 2);
  const auto bank = build_bank(ds, {Strategy::bss, 8, 1}, 300);
  const FeatureParams p{FeatureMap::soft, 0.1};
  const auto z = embed(ds.train, bank, p);
  for (std::size_t a = 0; a < z.rows; ++a) {
    const std::size_t b = (a * 7 + 3) % z.rows;
    double direct = 0;
    for (const auto& w : bank.strings) direct += feature(ds.train[a].chars, w, p) * feature(ds.train[b].chars, w, p);
    direct /= static_cast<double>(bank.size());
    EXPECT_NEAR(dot(z.row(a), z.row(b)), direct, 1e-12);
  }
}

TEST(Embed, ParallelMatchesSerial) {
  const auto ds = rse::testing::toy_dna(37, 3);
  const auto bank = build_bank(ds, {Strategy::ss, 9, 2}, 150);
  const FeatureParams p{FeatureMap::soft, 0.05};
  const auto serial = embed(ds.train, bank, p, 1);
  for (std::size_t w : {2u, 3u, 8u}) EXPECT_EQ(embed(ds.train, bank, p, w), serial);
}

TEST(Embed, ColumnPermutationEquivariance) {
  const auto ds = rse::testing::toy_dna(12, 4);
  auto bank = build_bank(ds, {Strategy::rfd, 6, 3}, 40);
  const FeatureParams p{FeatureMap::direct, 1.0};
  const auto z = embed(ds.train, bank, p);
  std::vector<std::size_t> perm(bank.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  RandomStream rng(4, "perm");
  rng.shuffle(perm.begin(), perm.end());
  auto shuffled = bank;
  for (std::size_t j = 0; j < perm.size(); ++j) shuffled.strings[j] = bank.strings[perm[j]];
  const auto zp = embed(ds.train, shuffled, p);
  for (std::size_t i = 0; i < z.rows; ++i)
    for (std::size_t j = 0; j < z.cols; ++j) EXPECT_EQ(zp.at(i, j), z.at(i, perm[j]));
}

TEST(Embed, RejectsEmptyBankAndBadGamma) {
  const auto recs = records_of({"AC"});
  EXPECT_THROW(embed(recs, RandomStringBank{}, {}), ArgumentError);
  EXPECT_THROW(embed(recs, bank_of({"A"}), {FeatureMap::soft, 0.0}), ArgumentError);
}

TEST(Embed, SavedBankGivesBitwiseEqualMatrix) {
  const auto ds = rse::testing::toy_dna(25, 5);
  const auto split = split_dataset(ds, 0.6, 1);
  const auto bank = build_bank(split, {Strategy::bss, 10, 4}, 200);
  TempDir dir("embed-bank");
  save_bank(dir / "bank.txt", bank, "seed=4");
  const FeatureParams p{FeatureMap::soft, 0.1};
  const auto direct = embed(split.train, bank, p);
  const auto reloaded = embed_with_saved_bank(split.train, dir / "bank.txt", p);
  EXPECT_EQ(direct, reloaded);
  const auto test_z = embed_with_saved_bank(split.test, dir / "bank.txt", p);
  EXPECT_EQ(test_z.cols, direct.cols);
  EXPECT_NO_THROW(require_same_bank(direct, test_z));
}

TEST(Embed, TruncatedBankFileNamesLine) {
  TempDir dir("embed-trunc");
  rse::testing::write_file(dir / "bank.txt", "RSE-BANK v1 strategy=RF d_max=3 seed=0 R=4\nAC\nG\n");
  try {
    embed_with_saved_bank(records_of({"ACGT"}), dir / "bank.txt", {});
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
}

TEST(Embed, MismatchedBanksAreAConsistencyError) {
  const auto recs = records_of({"ACGT", "GG"});
  const auto a = embed(recs, bank_of({"A", "C"}), {});
  const auto b = embed(recs, bank_of({"A", "G"}), {});
  const auto c = embed(recs, bank_of({"A", "C"}), {FeatureMap::soft, 2.0});
  EXPECT_THROW(require_same_bank(a, b), ConsistencyError);
  EXPECT_THROW(require_same_bank(a, c), ConsistencyError);
}

TEST(EmbeddingFile, DenseAndSparseRoundTrip) {
  const auto ds = rse::testing::toy_dna(15, 6);
  const auto bank = build_bank(ds, {Strategy::rf, 5, 0}, 33);
  for (const FeatureParams p : {FeatureParams{FeatureMap::soft, 0.7}, FeatureParams{FeatureMap::direct, 1.0}}) {
    const auto z = embed(ds.train, bank, p);
    for (auto fmt : {MatrixFormat::dense, MatrixFormat::svmlight}) {
      std::stringstream io;
      write_embedding(io, z, fmt, "gamma=0.7\nR=33");
      EXPECT_EQ(read_embedding(io), z);
    }
  }
}

TEST(EmbeddingFile, SparseWithoutDescriptor) {
  std::istringstream in("1 2:0.5\n0\n1 1:1 4:2\n");
  const auto z = read_embedding(in);
  EXPECT_EQ(z.rows, 3u);
  EXPECT_EQ(z.cols, 4u);
  EXPECT_EQ(z.values, (std::vector<double>{0, 0.5, 0, 0, 0, 0, 0, 0, 1, 0, 0, 2}));
  EXPECT_EQ(z.labels, (std::vector<int>{1, 0, 1}));
}

TEST(EmbeddingFile, Errors) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_embedding(in);
  };
  EXPECT_THROW(parse("0 1 2\n1 3\n"), ParseError);
  EXPECT_THROW(parse("0 1:1 0:2\n"), ParseError);
  EXPECT_THROW(parse("# rse-embedding rows=1 cols=2 fingerprint=0\n0 5:1\n"), ParseError);
  EXPECT_THROW(parse("0 abc\n"), ParseError);
  EXPECT_THROW(parse_matrix_format("csv"), ArgumentError);
}

TEST(EmbeddingMatrix, FloatExport) {
  const auto z = embed(records_of({"ACGT"}), bank_of({"A", "CG"}), {FeatureMap::soft, 1.0});
  const auto f = z.to_float();
  ASSERT_EQ(f.size(), 2u);
  EXPECT_FLOAT_EQ(f[0], static_cast<float>(z.values[0]));
}
