#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "substate/errors.hpp"
#include "substate/features.hpp"

namespace substate {
namespace {

StreamSummary summary_of(std::initializer_list<double> xs) {
  StreamSummary s;
  for (double x : xs) s.update(x);
  return s;
}

// The increment stream of input 00101111, worked by hand:
// deviations from 9.4 are 22.6, -1.4, -5.4, -7.4, -8.4.
TEST(ExtractFeatures, HandWorkedStream) {
  const auto f = extract_features(summary_of({32, 8, 4, 2, 1}));
  EXPECT_EQ(f.size, 5);
  EXPECT_EQ(f.min, 1);
  EXPECT_EQ(f.max, 32);
  EXPECT_DOUBLE_EQ(f.mean, 9.4);
  EXPECT_EQ(f.median, 4);
  EXPECT_NEAR(f.std_dev, std::sqrt(667.2 / 4), 1e-12);
  EXPECT_DOUBLE_EQ(f.iqr, 20.0 - 1.5);
  EXPECT_NEAR(f.gini, 418.0 / 235.0 - 1.2, 1e-12);
  EXPECT_NEAR(f.skewness, (10385.04 / 5) / std::pow(166.8, 1.5), 1e-9);
  const double m4 = std::pow(22.6, 4) + std::pow(1.4, 4) + std::pow(5.4, 4) + std::pow(7.4, 4) +
                    std::pow(8.4, 4);
  EXPECT_NEAR(f.kurtosis, (m4 / 5) / (166.8 * 166.8) - 3, 1e-9);
  EXPECT_EQ(f.mode, 1);  // all values unique: smallest wins
  EXPECT_EQ(f.longest_zero_run, 0);
  EXPECT_EQ(f.increasing, 0);
  EXPECT_EQ(f.decreasing, 1);
}

TEST(ExtractFeatures, SingleValue) {
  const auto f = extract_features(summary_of({7}));
  EXPECT_EQ(f.size, 1);
  EXPECT_EQ(f.median, 7);
  EXPECT_EQ(f.std_dev, 0);
  EXPECT_EQ(f.iqr, 0);
  EXPECT_EQ(f.skewness, 0);
  EXPECT_EQ(f.kurtosis, 0);
  EXPECT_EQ(f.gini, 0);
  EXPECT_EQ(f.increasing, 1);
  EXPECT_EQ(f.decreasing, 1);
}

TEST(ExtractFeatures, ConstantStreamHasZeroMoments) {
  const auto f = extract_features(summary_of({0, 0, 0, 0, 0, 0, 0}));
  EXPECT_EQ(f.std_dev, 0);
  EXPECT_EQ(f.skewness, 0);
  EXPECT_EQ(f.kurtosis, 0);
  EXPECT_EQ(f.gini, 0);  // zero sum
  EXPECT_EQ(f.longest_zero_run, 7);
}

TEST(ExtractFeatures, RejectsEmptyAndFlagged) {
  EXPECT_THROW(extract_features(StreamSummary{}), DomainError);
  EXPECT_THROW(extract_features(summary_of({1, std::numeric_limits<double>::quiet_NaN()})),
               DomainError);
  EXPECT_THROW(extract_features(summary_of({1, std::numeric_limits<double>::infinity()})),
               DomainError);
}

TEST(Quartiles, ExclusiveHalves) {
  const std::vector<double> odd = {1, 2, 4, 8, 32};
  const auto q = quartiles(odd);
  EXPECT_EQ(q.q1, 1.5);
  EXPECT_EQ(q.q2, 4);
  EXPECT_EQ(q.q3, 20);
  const std::vector<double> even = {1, 2, 3, 4, 5, 6};
  const auto e = quartiles(even);
  EXPECT_EQ(e.q1, 2);
  EXPECT_EQ(e.q2, 3.5);
  EXPECT_EQ(e.q3, 5);
  const std::vector<double> one = {3};
  EXPECT_EQ(quartiles(one).q1, 3);
  EXPECT_EQ(quartiles(one).q3, 3);
  EXPECT_THROW(quartiles(std::vector<double>{}), DomainError);
}

TEST(Gini, KnownValues) {
  EXPECT_DOUBLE_EQ(gini(std::vector<double>{5, 5, 5, 5}), 0.0);
  // One holder of everything among four: (n - 1) / n.
  EXPECT_DOUBLE_EQ(gini(std::vector<double>{0, 0, 0, 8}), 0.75);
  EXPECT_EQ(gini(std::vector<double>{-1, 1}), 0.0);  // zero sum
}

TEST(Gini, MatchesPairwiseDefinition) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    std::vector<double> xs(std::uniform_int_distribution<std::size_t>(1, 60)(rng));
    for (auto& x : xs) x = std::uniform_real_distribution<double>(0, 100)(rng);
    EXPECT_NEAR(gini(xs), oracle::gini_pairwise(xs), 1e-12);
  }
}

TEST(Mode, SmallestOfTies) {
  EXPECT_EQ(mode_of_sorted(std::vector<double>{1, 2, 2, 3, 3}), 2);
  EXPECT_EQ(mode_of_sorted(std::vector<double>{-128, 1, 4, 16}), -128);
  EXPECT_EQ(mode_of_sorted(std::vector<double>{0, 0, 0, 1}), 0);
}

TEST(OrderFeatures, InvariantsOnRandomSamples) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> xs(std::uniform_int_distribution<std::size_t>(1, 200)(rng));
    for (auto& x : xs) x = std::round(std::normal_distribution<double>(0, 30)(rng));
    StreamSummary s;
    for (double x : xs) s.update(x);
    const auto f = extract_features(s);
    ASSERT_LE(f.min, f.median);
    ASSERT_LE(f.median, f.max);
    ASSERT_LE(f.min, f.mean + 1e-9);
    ASSERT_LE(f.mean, f.max + 1e-9);
    ASSERT_GE(f.std_dev, 0);
    ASSERT_GE(f.iqr, 0);
  }
}

TEST(OrderFeatures, SkewSignFollowsReflection) {
  const std::vector<double> xs = {1, 2, 2, 3, 10};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(-x);
  const auto a = order_features(xs);
  const auto b = order_features(ys);
  EXPECT_GT(a.skewness, 0);
  EXPECT_NEAR(a.skewness, -b.skewness, 1e-12);
  EXPECT_NEAR(a.kurtosis, b.kurtosis, 1e-12);
}

TEST(FeatureVector, CanonicalOrder) {
  FeatureVector f;
  f.size = 1;
  f.decreasing = 14;
  const auto a = f.as_array();
  EXPECT_EQ(a.front(), 1);
  EXPECT_EQ(a.back(), 14);
  EXPECT_EQ(FeatureVector::names.front(), "size");
  EXPECT_EQ(FeatureVector::names[9], "gini");
}

}  // namespace
}  // namespace substate
