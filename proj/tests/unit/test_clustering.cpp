#include <gtest/gtest.h>

#include <random>

#include "fpfc/clustering.hpp"
#include "../support/fixtures.hpp"

using fpfc::Matrix;
using fpfc::Vector;

TEST(ClusterLabels, ConnectedComponentsOfThresholdGraph) {
  // Chain 0-1-2 below threshold, 3 alone, 4-5 together.
  Matrix dist = Matrix::Constant(6, 6, 10.0);
  dist.diagonal().setZero();
  auto link = [&](int i, int j, double v) { dist(i, j) = dist(j, i) = v; };
  link(0, 1, 0.05);
  link(1, 2, 0.09);
  link(0, 2, 0.5);  // transitivity through 1
  link(4, 5, 0.1);  // boundary counts as linked
  const auto labels = fpfc::cluster_labels(dist, 0.1);
  EXPECT_EQ(labels, (std::vector<int>{0, 0, 0, 1, 2, 2}));
}

TEST(ClusterLabels, FromPairwiseStateUsesThetaNorm) {
  fpfc::PairwiseState s(4, 2, 1.0);
  s.theta_matrix().setConstant(1.0);
  s.theta_col(fpfc::pair_offset(1, 3, 4)).setZero();
  const auto labels = fpfc::cluster_labels(s, 0.1);
  EXPECT_EQ(labels, (std::vector<int>{0, 1, 2, 1}));
}

TEST(AdjustedRandIndex, MatchesPairCountingOracle) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 2 + rng() % 30;
    const int kx = 1 + static_cast<int>(rng() % 5), ky = 1 + static_cast<int>(rng() % 5);
    std::vector<int> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<int>(rng() % kx);
      y[i] = static_cast<int>(rng() % ky);
    }
    EXPECT_NEAR(fpfc::adjusted_rand_index(x, y), oracle::ari_pairs(x, y), 1e-12);
  }
}

TEST(AdjustedRandIndex, EdgeCases) {
  EXPECT_EQ(fpfc::adjusted_rand_index({0, 0, 1, 1}, {5, 5, 2, 2}), 1.0);
  EXPECT_EQ(fpfc::adjusted_rand_index({0, 1, 2}, {0, 1, 2}), 1.0);
  EXPECT_EQ(fpfc::adjusted_rand_index({0, 0, 0}, {1, 1, 1}), 1.0);
  EXPECT_THROW(fpfc::adjusted_rand_index({0}, {0}), fpfc::InvalidArgument);
  EXPECT_THROW(fpfc::adjusted_rand_index({0, 1}, {0}), fpfc::InvalidArgument);
}

TEST(AssignClusters, WeightedMeansAndSingletonCopies) {
  fpfc::ModelParams w(3, 2);
  w.device(0) << 1, 2;
  w.device(1) << 3, 6;
  w.device(2) << 0.1, 0.7;
  const auto a = fpfc::assign_clusters({0, 0, 1}, {1.0, 3.0, 5.0}, w);
  EXPECT_EQ(a.count, 2u);
  EXPECT_NEAR(a.fused_models[0][0], (1 * 1 + 3 * 3) / 4.0, 1e-15);
  EXPECT_NEAR(a.fused_models[0][1], (1 * 2 + 3 * 6) / 4.0, 1e-15);
  EXPECT_EQ(a.fused_models[1], Vector(w.device(2)));
}

TEST(ClusterAssignment, JsonRoundTrip) {
  fpfc::ModelParams w(3, 2);
  w.device(0) << 1.0 / 3, 2;
  w.device(1) << 3, 6e-300;
  w.device(2) << -0.1, 0.7;
  const auto a = fpfc::assign_clusters({0, 1, 0}, {1.0, 1.0, 2.0}, w);
  const auto b = fpfc::cluster_assignment_from_json(fpfc::to_json(a));
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.count, b.count);
  ASSERT_EQ(a.fused_models.size(), b.fused_models.size());
  for (std::size_t k = 0; k < a.fused_models.size(); ++k) EXPECT_EQ(a.fused_models[k], b.fused_models[k]);
}

TEST(PairwiseDistances, Symmetric) {
  fpfc::ModelParams w(3, 2);
  w.device(0) << 0, 0;
  w.device(1) << 3, 4;
  w.device(2) << 0, 1;
  const Matrix d = fpfc::pairwise_distances(w);
  EXPECT_EQ(d(0, 1), 5.0);
  EXPECT_EQ(d(1, 0), 5.0);
  EXPECT_EQ(d(2, 2), 0.0);
  EXPECT_EQ(d(0, 2), 1.0);
}

TEST(OracleEstimator, MatchesStackedLeastSquares) {
  const auto fed = fixture::small_regression(6, 2, 9, 50, 3);
  const auto est = fpfc::oracle_estimator(fed);
  ASSERT_EQ(est.size(), 2u);
  for (int l = 0; l < 2; ++l) {
    // Rows of device i scaled by 1/sqrt(n_i): the least-squares solution then
    // minimises sum_i f_i over the cluster.
    std::vector<std::size_t> members;
    std::size_t rows = 0;
    for (std::size_t i = 0; i < fed.m(); ++i)
      if (fed.true_labels[i] == l) {
        members.push_back(i);
        rows += fed.devices[i].batch(fpfc::Split::Train).size();
      }
    Matrix a(static_cast<Eigen::Index>(rows), 3);
    Vector y(static_cast<Eigen::Index>(rows));
    Eigen::Index r = 0;
    for (std::size_t i : members) {
      const auto& b = fed.devices[i].batch(fpfc::Split::Train);
      const double s = 1.0 / std::sqrt(static_cast<double>(b.size()));
      a.middleRows(r, b.features.rows()) = s * b.features;
      y.segment(r, b.features.rows()) = s * b.targets;
      r += b.features.rows();
    }
    const Vector ref = a.colPivHouseholderQr().solve(y);
    EXPECT_LE((est[static_cast<std::size_t>(l)] - ref).norm(), 1e-10);
    EXPECT_LE((est[static_cast<std::size_t>(l)] - fed.true_params[static_cast<std::size_t>(l)]).norm(), 0.2);
  }
}

TEST(OracleEstimator, RankDeficientDesignThrows) {
  auto fed = fixture::small_regression(2, 2, 1, 20, 2);
  for (auto& dev : fed.devices) {
    dev.transform_features([](Matrix& x) { x.col(1) = 2.0 * x.col(0); });
  }
  EXPECT_THROW(fpfc::oracle_estimator(fed), fpfc::SingularDesignError);
}

TEST(OracleEstimator, RequiresRegressionWithTruth) {
  EXPECT_THROW(fpfc::oracle_estimator(fixture::small_softmax()), fpfc::InvalidArgument);
  auto fed = fixture::small_regression();
  fed.true_labels.clear();
  EXPECT_THROW(fpfc::oracle_estimator(fed), fpfc::InvalidArgument);
}
