#include "fpfc/penalty.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace fpfc {

namespace {

void check_smoothing(double lambda, double xi) {
  if (lambda > 0.0 && !(xi > 0.0 && xi < lambda)) {
    throw InvalidHyperParameter("hyperparams.xi: smoothed SCAD requires 0 < xi < lambda");
  }
}

}  // namespace

double scad(double t, double lambda, double a) {
  if (lambda == 0.0) return 0.0;
  const double at = std::abs(t);
  if (at <= lambda) return lambda * at;
  if (at <= a * lambda) return (a * lambda * at - 0.5 * (at * at + lambda * lambda)) / (a - 1.0);
  return lambda * lambda * (a + 1.0) / 2.0;
}

double smoothed_scad(double t, double lambda, double a, double xi) {
  if (lambda == 0.0) return 0.0;
  check_smoothing(lambda, xi);
  const double at = std::abs(t);
  if (at <= xi) return lambda / (2.0 * xi) * at * at + xi * lambda / 2.0;
  return scad(t, lambda, a);
}

double smoothed_scad_deriv(double t, double lambda, double a, double xi) {
  if (lambda == 0.0) return 0.0;
  check_smoothing(lambda, xi);
  const double at = std::abs(t);
  const double sign = t < 0.0 ? -1.0 : 1.0;
  if (at <= xi) return lambda / xi * t;
  if (at <= lambda) return sign * lambda;
  if (at <= a * lambda) return sign * (a * lambda - at) / (a - 1.0);
  return 0.0;
}

double smoothed_scad_lipschitz(double lambda, double a, double xi) {
  return std::max(lambda / xi, 1.0 / (a - 1.0));
}

double fusion_penalty(PenaltyKind kind, double t, const HyperParams& hp) {
  if (kind == PenaltyKind::GroupL1) return hp.lambda * std::abs(t);
  return smoothed_scad(t, hp.lambda, hp.a, hp.xi);
}

double fusion_penalty_exact(PenaltyKind kind, double t, const HyperParams& hp) {
  if (kind == PenaltyKind::GroupL1) return hp.lambda * std::abs(t);
  return scad(t, hp.lambda, hp.a);
}

double prox_smoothed_scad_factor(double norm, const HyperParams& hp) {
  const double lambda = hp.lambda;
  if (lambda == 0.0) return 1.0;
  const double a = hp.a;
  const double xi = hp.xi;
  const double rho = hp.rho;
  check_smoothing(lambda, xi);
  if (!((a - 1.0) * rho > 1.0)) {
    throw InvalidHyperParameter("hyperparams.rho: smoothed SCAD prox requires (a - 1) * rho > 1");
  }
  if (norm == 0.0) return 0.0;

  if (norm <= xi + lambda / rho) return xi * rho / (lambda + xi * rho);
  if (norm <= lambda + lambda / rho) return 1.0 - lambda / (rho * norm);
  if (norm <= a * lambda) {
    const double num = std::max(0.0, 1.0 - a * lambda / ((a - 1.0) * rho * norm));
    return num / (1.0 - 1.0 / ((a - 1.0) * rho));
  }
  return 1.0;
}

Vector prox_smoothed_scad(const Eigen::Ref<const Vector>& delta, const HyperParams& hp) {
  const double factor = prox_smoothed_scad_factor(delta.norm(), hp);
  return factor * delta;
}

Vector prox_group_l1(const Eigen::Ref<const Vector>& delta, double lambda, double rho) {
  if (!(rho > 0.0)) throw InvalidHyperParameter("hyperparams.rho: must be > 0");
  const double norm = delta.norm();
  if (norm == 0.0) return Vector::Zero(delta.size());
  return std::max(0.0, 1.0 - lambda / (rho * norm)) * delta;
}

Vector prox_fusion(PenaltyKind kind, const Eigen::Ref<const Vector>& delta, const HyperParams& hp) {
  if (kind == PenaltyKind::GroupL1) {
    if (hp.lambda == 0.0) return delta;
    return prox_group_l1(delta, hp.lambda, hp.rho);
  }
  return prox_smoothed_scad(delta, hp);
}

Vector prox_scad(const Eigen::Ref<const Vector>& delta, double lambda, double a, double weight) {
  const double t = delta.norm();
  if (t == 0.0 || lambda == 0.0) return delta;
  auto phi = [&](double s) { return scad(s, lambda, a) + 0.5 * weight * (s - t) * (s - t); };
  auto clip = [](double s, double lo, double hi) { return std::min(std::max(s, lo), hi); };

  std::array<double, 8> cand{};
  std::size_t n = 0;
  cand[n++] = 0.0;
  cand[n++] = lambda;
  cand[n++] = a * lambda;
  cand[n++] = clip(t - lambda / weight, 0.0, lambda);
  const double curv = weight - 1.0 / (a - 1.0);
  if (curv != 0.0) {
    cand[n++] = clip((weight * t - a * lambda / (a - 1.0)) / curv, lambda, a * lambda);
  }
  cand[n++] = std::max(t, a * lambda);

  double best_s = cand[0];
  double best = phi(best_s);
  for (std::size_t k = 1; k < n; ++k) {
    const double v = phi(cand[k]);
    if (v < best) {
      best = v;
      best_s = cand[k];
    }
  }
  return (best_s / t) * delta;
}

}  // namespace fpfc
