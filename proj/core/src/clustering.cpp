#include "fpfc/clustering.hpp"

#include <cmath>
#include <iostream>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

namespace fpfc {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // The smaller root wins so each component is rooted at its smallest member.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) parent_[b] = a;
    else parent_[a] = b;
  }

 private:
  std::vector<std::size_t> parent_;
};

// Component ids in order of each component's smallest member.
std::vector<int> relabel(UnionFind& uf, std::size_t m) {
  std::vector<int> labels(m, -1);
  std::vector<int> id_of_root(m, -1);
  int next = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t r = uf.find(i);
    if (id_of_root[r] < 0) id_of_root[r] = next++;
    labels[i] = id_of_root[r];
  }
  return labels;
}

double choose2(double n) { return n * (n - 1.0) / 2.0; }

}  // namespace

std::vector<int> cluster_labels(const PairwiseState& pairwise, double nu) {
  if (!(nu >= 0.0)) throw InvalidArgument("hyperparams.nu must be >= 0");
  const std::size_t m = pairwise.m();
  UnionFind uf(m);
  const double nu_sq = nu * nu;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (pairwise.theta_col(pair_offset(i, j, m)).squaredNorm() <= nu_sq) uf.unite(i, j);

  return relabel(uf, m);
}

std::vector<int> cluster_labels(const Matrix& distances, double nu) {
  if (!(nu >= 0.0)) throw InvalidArgument("hyperparams.nu must be >= 0");
  if (distances.rows() != distances.cols()) throw InvalidArgument("distance matrix must be square");
  const auto m = static_cast<std::size_t>(distances.rows());
  UnionFind uf(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) <= nu) uf.unite(i, j);
  return relabel(uf, m);
}

ClusterAssignment assign_clusters(std::vector<int> labels, const std::vector<double>& sample_sizes,
                                  const ModelParams& omega) {
  const std::size_t m = labels.size();
  if (sample_sizes.size() != m || omega.m() != m) {
    throw InvalidArgument("sample sizes and parameters must cover every device");
  }
  ClusterAssignment out;
  out.labels = std::move(labels);
  for (int l : out.labels) {
    if (l < 0) throw InvalidArgument("negative cluster label");
    out.count = std::max(out.count, static_cast<std::size_t>(l) + 1);
  }

  std::vector<double> weight(out.count, 0.0);
  out.fused_models.assign(out.count, Vector::Zero(static_cast<Eigen::Index>(omega.d())));
  std::vector<std::size_t> members(out.count, 0);
  std::vector<std::size_t> last(out.count, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto l = static_cast<std::size_t>(out.labels[i]);
    out.fused_models[l] += sample_sizes[i] * omega.device(i);
    weight[l] += sample_sizes[i];
    ++members[l];
    last[l] = i;
  }
  for (std::size_t l = 0; l < out.count; ++l) {
    if (members[l] == 0) throw InvalidArgument("cluster labels are not contiguous");
    if (members[l] == 1) {
      out.fused_models[l] = omega.device(last[l]);
    } else if (weight[l] > 0.0) {
      out.fused_models[l] /= weight[l];
    } else {
      throw InvalidArgument("cluster with zero total sample size");
    }
  }
  return out;
}

ClusterAssignment extract_clusters(const PairwiseState& pairwise,
                                   const std::vector<double>& sample_sizes,
                                   const ModelParams& omega, double nu) {
  if (omega.m() != pairwise.m()) throw InvalidArgument("parameters must cover every device");
  return assign_clusters(cluster_labels(pairwise, nu), sample_sizes, omega);
}

double adjusted_rand_index(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size()) throw InvalidArgument("label vectors differ in length");
  if (pred.size() < 2) throw InvalidArgument("ARI needs at least two items");
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    table[{pred[k], truth[k]}] += 1.0;
    rows[pred[k]] += 1.0;
    cols[truth[k]] += 1.0;
  }
  double index = 0.0;
  for (const auto& [key, n] : table) index += choose2(n);
  double a = 0.0;
  double b = 0.0;
  for (const auto& [key, n] : rows) a += choose2(n);
  for (const auto& [key, n] : cols) b += choose2(n);
  const double total = choose2(static_cast<double>(pred.size()));
  const double expected = a * b / total;
  const double max_index = 0.5 * (a + b);
  if (max_index == expected) return 1.0;  // both partitions trivial and identical in shape
  return (index - expected) / (max_index - expected);
}

Matrix pairwise_distances(const ModelParams& omega) {
  const auto m = static_cast<Eigen::Index>(omega.m());
  Matrix out = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double dist = (omega.matrix().col(i) - omega.matrix().col(j)).norm();
      out(i, j) = dist;
      out(j, i) = dist;
    }
  }
  return out;
}

std::vector<Vector> oracle_estimator(const Federation& fed) {
  if (fed.spec.kind != ModelKind::LinearRegression) {
    throw InvalidArgument("the oracle estimator needs a regression federation");
  }
  if (!fed.has_truth()) throw InvalidArgument("the oracle estimator needs true labels");
  int clusters = 0;
  for (int l : fed.true_labels) {
    if (l < 0) throw InvalidArgument("negative cluster label");
    clusters = std::max(clusters, l + 1);
  }
  const auto p = static_cast<Eigen::Index>(fed.spec.p);
  const auto d = static_cast<Eigen::Index>(fed.spec.d());

  std::vector<Matrix> gram(static_cast<std::size_t>(clusters), Matrix::Zero(d, d));
  std::vector<Vector> rhs(static_cast<std::size_t>(clusters), Vector::Zero(d));
  for (std::size_t i = 0; i < fed.m(); ++i) {
    const Batch& b = fed.devices[i].batch(Split::Train);
    Matrix design(b.features.rows(), d);
    design.leftCols(p) = b.features;
    if (fed.spec.intercept) design.col(p).setOnes();
    const double w = 1.0 / static_cast<double>(b.size());
    const auto l = static_cast<std::size_t>(fed.true_labels[i]);
    gram[l].noalias() += w * (design.transpose() * design);
    rhs[l].noalias() += w * (design.transpose() * b.targets);
  }

  std::vector<Vector> out;
  for (int l = 0; l < clusters; ++l) {
    const auto idx = static_cast<std::size_t>(l);
    Eigen::LLT<Matrix> llt(gram[idx]);
    if (llt.info() != Eigen::Success) {
      throw SingularDesignError("cluster " + std::to_string(l) + " has a rank-deficient design");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram[idx], Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) {
      throw SingularDesignError("cluster " + std::to_string(l) + " has a rank-deficient design");
    }
    if (hi / lo > 1e10) {
      std::cerr << "warning: cluster " << l << " design condition number " << hi / lo
                << " exceeds 1e10\n";
    }
    out.push_back(llt.solve(rhs[idx]));
  }
  return out;
}

std::string to_json(const ClusterAssignment& a) {
  nlohmann::json j;
  j["num_clusters"] = a.count;
  j["labels"] = a.labels;
  nlohmann::json models = nlohmann::json::array();
  for (const auto& v : a.fused_models) models.push_back(std::vector<double>(v.begin(), v.end()));
  j["fused_models"] = models;
  return j.dump(2);
}

ClusterAssignment cluster_assignment_from_json(const std::string& text) {
  ClusterAssignment a;
  try {
    const auto j = nlohmann::json::parse(text);
    a.count = j.at("num_clusters").get<std::size_t>();
    a.labels = j.at("labels").get<std::vector<int>>();
    for (const auto& v : j.at("fused_models")) {
      const auto values = v.get<std::vector<double>>();
      a.fused_models.push_back(Eigen::Map<const Vector>(values.data(),
                                                        static_cast<Eigen::Index>(values.size())));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("cluster record: ") + e.what(), 0, 0);
  }
  if (a.fused_models.size() != a.count) throw SchemaError("cluster record: model count mismatch");
  for (int l : a.labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= a.count) {
      throw SchemaError("cluster record: label out of range");
    }
  }
  return a;
}

}  // namespace fpfc
