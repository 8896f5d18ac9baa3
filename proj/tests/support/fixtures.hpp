#pragma once

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "fpfc/data.hpp"
#include "fpfc/engine.hpp"
#include "oracles.hpp"

namespace fixture {

inline fpfc::Federation small_regression(std::size_t m = 6, std::size_t clusters = 2,
                                         std::uint64_t seed = 3, std::size_t n = 40,
                                         std::size_t d = 3) {
  fpfc::LinearClusterOptions o;
  o.m = m;
  o.clusters = clusters;
  o.n_per_device = n;
  o.d = d;
  o.gap = 3.0;
  o.noise = 0.3;
  return fpfc::gen_linear_clusters(o, seed);
}

inline fpfc::Federation small_softmax(std::uint64_t seed = 5) {
  fpfc::SyntheticOptions o;
  o.cluster_sizes = {3, 3};
  o.p = 4;
  o.classes = 3;
  o.min_samples = 30;
  o.max_samples = 60;
  return fpfc::gen_synthetic(o, seed);
}

/// Closed-form Hessian and linear term of a device's squared loss on its
/// training split: f(w) = w'Hw/2 - b'w + const.
struct Quadratic {
  Eigen::MatrixXd h;
  Eigen::VectorXd b;
};

inline Quadratic quadratic_of(const fpfc::Federation& fed, std::size_t i) {
  const fpfc::Batch& tr = fed.devices[i].batch(fpfc::Split::Train);
  const auto n = static_cast<double>(tr.size());
  Eigen::MatrixXd x = tr.features;
  if (fed.spec.intercept) {
    x.conservativeResize(Eigen::NoChange, x.cols() + 1);
    x.col(x.cols() - 1).setOnes();
  }
  return {(2.0 / n) * x.transpose() * x, (2.0 / n) * x.transpose() * tr.targets};
}

/// Reference ADMM state holding every ordered pair explicitly.
struct NaiveAdmm {
  std::size_t m = 0;
  double rho = 1.0;
  std::vector<Eigen::VectorXd> omega;
  std::map<std::pair<std::size_t, std::size_t>, Eigen::VectorXd> theta, dual;
  std::vector<Eigen::VectorXd> zeta;

  NaiveAdmm(const fpfc::ModelParams& start, double rho_) : m(start.m()), rho(rho_) {
    for (std::size_t i = 0; i < m; ++i) omega.push_back(start.device(i));
    const auto d = static_cast<Eigen::Index>(start.d());
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        theta[{i, j}] = Eigen::VectorXd::Zero(d);
        dual[{i, j}] = Eigen::VectorXd::Zero(d);
      }
    refresh_zeta();
  }

  void refresh_zeta() {
    zeta.assign(m, Eigen::VectorXd::Zero(omega[0].size()));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) zeta[i] += omega[j] + theta[{i, j}] - dual[{i, j}] / rho;
      zeta[i] /= static_cast<double>(m);
    }
  }

  /// Radial prox by numeric minimisation of the smoothed SCAD objective.
  static Eigen::VectorXd prox(const Eigen::VectorXd& delta, double lambda, double a, double xi,
                              double rho) {
    const double r = delta.norm();
    if (r == 0.0) return delta;
    const double s = oracle::minimize_1d(
        [&](double x) { return oracle::smoothed_scad(x, lambda, a, xi) + 0.5 * rho * (x - r) * (x - r); },
        0.0, r, 20000);
    return (s / r) * delta;
  }

  void update_pairs(const std::vector<char>& active, double lambda, double a, double xi) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) {
        if (!active[i] && !active[j]) continue;
        const Eigen::VectorXd diff = omega[i] - omega[j];
        const Eigen::VectorXd t = prox(diff + dual[{i, j}] / rho, lambda, a, xi, rho);
        const Eigen::VectorXd v = dual[{i, j}] + rho * (diff - t);
        theta[{i, j}] = t;
        theta[{j, i}] = -t;
        dual[{i, j}] = v;
        dual[{j, i}] = -v;
      }
  }
};

}  // namespace fixture
