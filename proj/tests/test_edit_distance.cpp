#include <gtest/gtest.h>

#include <cmath>

#include "rse/edit_distance_oracle.hpp"
#include "test_util.hpp"

using namespace rse;
using rse::testing::random_string;

TEST(Levenshtein, BaseCases) {
  EXPECT_EQ(levenshtein("", ""), 0u);
  EXPECT_EQ(levenshtein("", "abc"), 3u);
  EXPECT_EQ(levenshtein("abc", ""), 3u);
  EXPECT_EQ(naive_levenshtein_oracle("abc", ""), 3u);
}

TEST(Levenshtein, KnownValues) {
  EXPECT_EQ(levenshtein("kitten", "sitting"), 3u);
  EXPECT_EQ(naive_levenshtein_oracle("kitten", "sitting"), 3u);
  EXPECT_EQ(levenshtein("ab", "ba"), 2u);
  EXPECT_EQ(naive_levenshtein_oracle("ab", "ba"), 2u);
  EXPECT_EQ(levenshtein("flaw", "lawn"), 2u);
  EXPECT_EQ(levenshtein("ACGT", "ACGT"), 0u);
}

TEST(Levenshtein, LongShorterSideUsesHeapRow) {
  const std::string a(300, 'A');
  std::string b = a;
  b[10] = 'C';
  b += "GG";
  EXPECT_EQ(levenshtein(a, b), 3u);
  EXPECT_EQ(levenshtein(b, a), 3u);
  EXPECT_EQ(naive_levenshtein_oracle(a, b), 3u);
}

TEST(Levenshtein, MatchesOracleOnRandomPairs) {
  RandomStream rng(11, "ld-oracle");
  for (std::string_view alphabet : {"01", "ACGT", "ACDEFGHIKLMNPQRSTVWY"}) {
    for (int k = 0; k < 1500; ++k) {
      const auto x = random_string(rng, alphabet, 64);
      const auto w = random_string(rng, alphabet, 64);
      ASSERT_EQ(levenshtein(x, w), naive_levenshtein_oracle(x, w)) << x << " / " << w;
    }
  }
}

TEST(Levenshtein, MetricAxioms) {
  RandomStream rng(12, "metric");
  for (int k = 0; k < 500; ++k) {
    const auto x = random_string(rng, "ACGT", 30);
    const auto y = random_string(rng, "ACGT", 30);
    const auto z = random_string(rng, "ACGT", 30);
    const auto dxy = levenshtein(x, y), dyx = levenshtein(y, x);
    const auto dxz = levenshtein(x, z), dyz = levenshtein(y, z);
    EXPECT_EQ(dxy, dyx);
    EXPECT_EQ(dxy == 0, x == y);
    EXPECT_LE(dxz, dxy + dyz);
    EXPECT_LE(std::abs(static_cast<long>(dxy) - static_cast<long>(dxz)), static_cast<long>(dyz));
    EXPECT_LE(dxy, std::max(x.size(), y.size()));
    EXPECT_EQ(levenshtein(x, x), 0u);
  }
}

TEST(Feature, DirectAndSoft) {
  const FeatureParams df{FeatureMap::direct, 1.0};
  const FeatureParams sf{FeatureMap::soft, 0.1};
  EXPECT_EQ(feature("kitten", "sitting", df), 3.0);
  EXPECT_NEAR(feature("kitten", "sitting", sf), 0.74081822068171786607, 1e-15);
  EXPECT_NEAR(feature_from_distance(3, sf), 0.74081822068171786607, 1e-15);
  EXPECT_EQ(feature("ACGT", "ACGT", sf), 1.0);
  EXPECT_EQ(feature("ACGT", "ACGT", FeatureParams{FeatureMap::soft, 37.0}), 1.0);
  EXPECT_EQ(feature("ACGT", "ACGT", df), 0.0);
}

TEST(Feature, SoftIsMonotoneAndBounded) {
  const FeatureParams sf{FeatureMap::soft, 0.25};
  double prev = 2.0;
  for (std::uint32_t d = 0; d < 200; ++d) {
    const double v = feature_from_distance(d, sf);
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Feature, ParamsValidation) {
  EXPECT_THROW((FeatureParams{FeatureMap::soft, 0.0}.validate()), ArgumentError);
  EXPECT_THROW((FeatureParams{FeatureMap::soft, -1.0}.validate()), ArgumentError);
  EXPECT_NO_THROW((FeatureParams{FeatureMap::direct, 0.0}.validate()));
  EXPECT_EQ(parse_feature_map("DF"), FeatureMap::direct);
  EXPECT_EQ(parse_feature_map("SF"), FeatureMap::soft);
  EXPECT_THROW(parse_feature_map("XF"), ArgumentError);
}
