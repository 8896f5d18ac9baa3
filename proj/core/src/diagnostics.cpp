#include <cmath>
#include <limits>

#include "engine_internal.hpp"
#include "fpfc/engine.hpp"
#include "fpfc/penalty.hpp"

namespace fpfc {

Evaluation evaluate(const Federation& fed, const ModelParams& omega) {
  if (omega.m() != fed.m()) throw InvalidArgument("parameter count differs from device count");
  detail::MetricCache cache(fed, true, true);
  cache.refresh_all(fed, omega);
  return {cache.pooled_train_loss(), cache.pooled_metric(Split::Validation),
          cache.pooled_metric(Split::Test)};
}

double objective(const ModelParams& omega, const Federation& fed, const HyperParams& hp,
                 PenaltyKind kind) {
  const std::size_t m = fed.m();
  if (omega.m() != m) throw InvalidArgument("parameter count differs from device count");
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    total += loss(fed.spec, omega.device(i), fed.devices[i].batch(Split::Train));
  }
  if (hp.lambda == 0.0) return total;
  double pen = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      pen += fusion_penalty_exact(kind, (omega.device(i) - omega.device(j)).norm(), hp);
  // Ordered pairs count each unordered pair twice: (1/2m) * 2 * sum_{i<j}.
  return total + pen / static_cast<double>(m);
}

double aug_lagrangian_from_losses(const EngineState& state, const std::vector<double>& losses,
                                  const HyperParams& hp, PenaltyKind kind) {
  const std::size_t m = state.m();
  const double rho = state.pairwise.rho();
  double f = 0.0;
  for (double v : losses) f += v;

  double pairs = 0.0;
  Vector resid(static_cast<Eigen::Index>(state.d()));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const std::size_t off = pair_offset(i, j, m);
      const auto theta = state.pairwise.theta_col(off);
      resid = state.omega.device(i) - state.omega.device(j) - theta;
      pairs += fusion_penalty(kind, theta.norm(), hp) +
               state.pairwise.dual_col(off).dot(resid) + 0.5 * rho * resid.squaredNorm();
    }
  }
  // Diagonal pairs contribute g~(0) each: m * g~(0) / (2m).
  const double diagonal = 0.5 * fusion_penalty(kind, 0.0, hp);
  return f + pairs / static_cast<double>(m) + diagonal;
}

double aug_lagrangian(const EngineState& state, const Federation& fed, const HyperParams& hp,
                      PenaltyKind kind) {
  std::vector<double> losses(fed.m());
  for (std::size_t i = 0; i < fed.m(); ++i) {
    losses[i] = loss(fed.spec, state.omega.device(i), fed.devices[i].batch(Split::Train));
  }
  return aug_lagrangian_from_losses(state, losses, hp, kind);
}

StationarityResiduals stationarity_residuals(const EngineState& state, const Federation& fed,
                                             const HyperParams& hp) {
  const std::size_t m = state.m();
  StationarityResiduals out;
  for (std::size_t i = 0; i < m; ++i) {
    Vector g = grad(fed.spec, state.omega.device(i), fed.devices[i].batch(Split::Train));
    Vector dual_sum = Vector::Zero(g.size());
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) dual_sum += state.pairwise.dual(i, j);
    g += dual_sum / static_cast<double>(m);
    out.grad_norm_sq += g.squaredNorm();
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const std::size_t off = pair_offset(i, j, m);
      const Vector theta = state.pairwise.theta_col(off);
      const Vector dual = state.pairwise.dual_col(off);
      const Vector g = theta - prox_scad(theta + dual, hp.lambda, hp.a, 1.0);
      const Vector r = state.omega.device(i) - state.omega.device(j) - theta;
      // (i, j) and (j, i) contribute equally.
      out.prox_residual_sq += 2.0 * g.squaredNorm();
      out.feasibility_sq += 2.0 * r.squaredNorm();
    }
  }
  return out;
}

double contraction_factor(double alpha, double rho, double l_f, double l_minus,
                          ContractionVariant variant) {
  const double mu = rho - l_minus;
  if (!(mu > 0.0)) throw InvalidHyperParameter("hyperparams.rho must exceed L_minus");
  const double k = variant == ContractionVariant::SmoothnessWithProx ? l_f + rho : l_f;
  const double c = 1.0 - alpha * 2.0 * mu * k / (l_f + rho + mu);
  if (!(c > 0.0 && c < 1.0)) {
    throw InvalidHyperParameter("hyperparams.alpha gives contraction factor c = " +
                                std::to_string(c) + " outside (0, 1)");
  }
  return c;
}

std::size_t epochs_for_contraction(double epsilon, double c) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be > 0");
  if (!(c > 0.0 && c < 1.0)) throw InvalidHyperParameter("contraction factor must lie in (0, 1)");
  const double t = 2.0 * std::log(epsilon / (1.0 + epsilon)) / std::log(c);
  const double up = std::ceil(t - 1e-9);
  return up < 1.0 ? 1 : static_cast<std::size_t>(up);
}

std::size_t inexactness_epochs(double epsilon, double alpha, double rho, double l_f,
                               double l_minus, ContractionVariant variant) {
  return epochs_for_contraction(epsilon, contraction_factor(alpha, rho, l_f, l_minus, variant));
}

double relative_accuracy(std::size_t epochs, double c) {
  if (!(c > 0.0 && c < 1.0)) throw InvalidHyperParameter("contraction factor must lie in (0, 1)");
  if (epochs == 0) return std::numeric_limits<double>::infinity();
  return 1.0 / (std::pow(c, -0.5 * static_cast<double>(epochs)) - 1.0);
}

FeasibilityReport descent_conditions(const HyperParams& hp, std::size_t epochs, double l_f,
                                     double l_minus, ContractionVariant variant) {
  FeasibilityReport rep;
  auto fail = [&](const std::string& why) {
    rep.ok = false;
    rep.violations.push_back(why);
  };
  double c = 0.0;
  try {
    c = contraction_factor(hp.alpha, hp.rho, l_f, l_minus, variant);
  } catch (const InvalidHyperParameter& e) {
    fail(e.what());
    return rep;
  }
  const auto t = static_cast<double>(epochs);
  if (!(t > -2.0 * std::log(2.0) / std::log(c))) fail("local epochs T too small for c");
  if (!(hp.alpha <= 1.0 / (l_f + 2.0 * hp.rho - l_minus))) {
    fail("alpha exceeds 1 / (L_f + 2 rho - L_minus)");
  }
  const double shrink = 1.0 - 2.0 * std::pow(c, 0.5 * t);
  if (!(shrink > 0.0 && hp.rho > l_f / shrink)) fail("rho <= L_f / (1 - 2 c^(T/2))");
  if (hp.lambda > 0.0 && !(hp.rho > 2.0 * hp.lambda / hp.xi)) fail("rho <= 2 lambda / xi");
  if (!(hp.rho > 2.0 / (hp.a - 1.0))) fail("rho <= 2 / (a - 1)");
  if (!(hp.rho > l_minus)) fail("rho <= L_minus");
  return rep;
}

}  // namespace fpfc
