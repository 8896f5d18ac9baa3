#pragma once

#include <string>
#include <vector>

#include "fpfc/data.hpp"
#include "fpfc/types.hpp"

namespace fpfc {

struct ClusterAssignment {
  std::vector<int> labels;  // cluster id per device, ids ordered by smallest member
  std::size_t count = 0;
  std::vector<Vector> fused_models;  // n_i-weighted member means
};

/// Connected components of the graph with edge (i, j) iff |theta_ij| <= nu.
std::vector<int> cluster_labels(const PairwiseState& pairwise, double nu);

/// Same rule applied to an m x m distance matrix.
std::vector<int> cluster_labels(const Matrix& distances, double nu);

/// Fused models for a given labelling (ids in [0, count)).
ClusterAssignment assign_clusters(std::vector<int> labels, const std::vector<double>& sample_sizes,
                                  const ModelParams& omega);

ClusterAssignment extract_clusters(const PairwiseState& pairwise,
                                   const std::vector<double>& sample_sizes,
                                   const ModelParams& omega, double nu);

/// Pair-counting adjusted Rand index. Two all-singleton (or two single-block)
/// partitions score 1. Throws InvalidArgument on length mismatch or length < 2.
double adjusted_rand_index(const std::vector<int>& pred, const std::vector<int>& truth);

/// m x m matrix of |omega_i - omega_j|.
Matrix pairwise_distances(const ModelParams& omega);

/// Least squares with the true partition known: per cluster solves
/// sum_{i in G} (1/n_i) X_i^T X_i alpha = sum_{i in G} (1/n_i) X_i^T y_i on the
/// training split. Regression federations only. Throws SingularDesignError
/// when a cluster's design is rank deficient.
std::vector<Vector> oracle_estimator(const Federation& fed);

std::string to_json(const ClusterAssignment& a);
ClusterAssignment cluster_assignment_from_json(const std::string& text);

}  // namespace fpfc
