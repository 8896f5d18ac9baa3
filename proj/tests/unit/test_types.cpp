#include <gtest/gtest.h>

#include <cstring>

#include "fpfc/rng.hpp"
#include "fpfc/types.hpp"

using fpfc::Vector;

TEST(PairIndex, OrderedAndReversed) {
  const auto a = fpfc::pair_index(2, 5, 10);
  EXPECT_EQ(a.first, 2u);
  EXPECT_EQ(a.second, 5u);
  EXPECT_EQ(a.sign, 1);
  const auto b = fpfc::pair_index(5, 2, 10);
  EXPECT_EQ(b.first, 2u);
  EXPECT_EQ(b.second, 5u);
  EXPECT_EQ(b.sign, -1);
  EXPECT_EQ(a.offset, b.offset);
}

TEST(PairIndex, RejectsDiagonalAndOutOfRange) {
  EXPECT_THROW(fpfc::pair_index(3, 3, 10), fpfc::InvalidArgument);
  EXPECT_THROW(fpfc::pair_index(3, 10, 10), fpfc::InvalidArgument);
}

TEST(PairIndex, OffsetsEnumerateUpperTriangle) {
  const std::size_t m = 9;
  std::size_t expected = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) EXPECT_EQ(fpfc::pair_index(i, j, m).offset, expected++);
  EXPECT_EQ(expected, fpfc::pair_count(m));
}

TEST(L2Norm, Examples) {
  Vector a(2);
  a << 3, 4;
  EXPECT_EQ(fpfc::l2_norm(a), 5.0);
  EXPECT_EQ(fpfc::l2_norm(Vector::Zero(5)), 0.0);
  EXPECT_EQ(fpfc::l2_norm(Vector::Ones(4)), 2.0);
}

TEST(PairwiseState, ReversedLookupIsBitwiseNegation) {
  fpfc::PairwiseState s(5, 3, 1.0);
  for (std::size_t k = 0; k < s.pairs(); ++k) {
    s.theta_col(k) = Vector::LinSpaced(3, 0.1 * k, -0.3 * k + 0.7);
    s.dual_col(k) = Vector::LinSpaced(3, 1.0 / (k + 1), 2.0);
  }
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(s.theta(i, i), Vector::Zero(3));
    for (std::size_t j = 0; j < 5; ++j) {
      if (i == j) continue;
      const Vector a = s.theta(i, j), b = s.theta(j, i);
      for (int k = 0; k < 3; ++k) {
        const double neg = -b[k];
        EXPECT_EQ(std::memcmp(&a[k], &neg, sizeof(double)), 0);
      }
      EXPECT_EQ(s.dual(i, j), -s.dual(j, i));
    }
  }
}

TEST(PairwiseState, ScenarioSizeConstructs) {
  fpfc::PairwiseState s(100, 610, 1.0);
  EXPECT_EQ(s.pairs(), 4950u);
  EXPECT_EQ(s.d(), 610u);
  EXPECT_EQ(s.theta_matrix().cols(), 4950);
}

TEST(ModelParams, ReplicatedCopiesShareValues) {
  const Vector v = Vector::LinSpaced(4, -1, 1);
  const auto p = fpfc::ModelParams::replicated(v, 3);
  EXPECT_EQ(p.m(), 3u);
  EXPECT_EQ(p.d(), 4u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(Vector(p.device(i)), v);
}

TEST(HyperParams, ValidationNamesField) {
  fpfc::HyperParams hp;
  hp.lambda = 1.0;
  hp.xi = 2.0;
  try {
    hp.validate();
    FAIL();
  } catch (const fpfc::InvalidHyperParameter& e) {
    EXPECT_NE(std::string(e.what()).find("xi"), std::string::npos);
  }
  hp.xi = 0.1;
  hp.a = 1.0;
  EXPECT_THROW(hp.validate(), fpfc::InvalidHyperParameter);
  hp.a = 3.7;
  hp.rho = 0.0;
  EXPECT_THROW(hp.validate(), fpfc::InvalidHyperParameter);
  hp.lambda = 0.0;
  EXPECT_NO_THROW(hp.validate());  // uncoupled local training
  hp.alpha = -1.0;
  EXPECT_THROW(hp.validate(), fpfc::InvalidHyperParameter);
}

TEST(HyperParams, GroupL1IgnoresSmoothing) {
  fpfc::HyperParams hp;
  hp.lambda = 1.0;
  hp.xi = 5.0;
  hp.rho = 0.2;
  EXPECT_NO_THROW(hp.validate(fpfc::PenaltyKind::GroupL1));
}

TEST(DeviceData, SplitMustPartitionRows) {
  fpfc::DeviceData d(fpfc::Matrix::Zero(4, 2), Vector::Zero(4));
  EXPECT_THROW(d.set_split({0, 1}, {1}, {3}), fpfc::InvalidArgument);
  EXPECT_THROW(d.set_split({0, 1}, {2}, {}), fpfc::InvalidArgument);
  d.set_split({0, 1}, {2}, {3});
  EXPECT_EQ(d.batch(fpfc::Split::Train).size(), 2u);
  EXPECT_EQ(d.batch(fpfc::Split::Test).size(), 1u);
}

TEST(Rng, DerivedSeedsAreDistinctAndStable) {
  const auto a = fpfc::derive_seed(7, {1, 2});
  EXPECT_EQ(a, fpfc::derive_seed(7, {1, 2}));
  EXPECT_NE(a, fpfc::derive_seed(7, {2, 1}));
  EXPECT_NE(a, fpfc::derive_seed(8, {1, 2}));
  EXPECT_NE(fpfc::derive_seed(7, {1}), fpfc::derive_seed(7, {1, 0}));
}
