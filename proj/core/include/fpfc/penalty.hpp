#pragma once

#include "fpfc/types.hpp"

namespace fpfc {

// SCAD and its quadratic-near-zero smoothing. All scalar functions are even in
// t; lambda == 0 gives the zero penalty.

double scad(double t, double lambda, double a);

/// Throws InvalidHyperParameter unless 0 < xi < lambda (or lambda == 0).
double smoothed_scad(double t, double lambda, double a, double xi);

double smoothed_scad_deriv(double t, double lambda, double a, double xi);

/// Lipschitz constant of smoothed_scad_deriv: max(lambda / xi, 1 / (a - 1)).
double smoothed_scad_lipschitz(double lambda, double a, double xi);

/// Penalty value used by the server's theta-step: smoothed SCAD or lambda*|t|.
double fusion_penalty(PenaltyKind kind, double t, const HyperParams& hp);

/// Unsmoothed penalty used by the original objective: SCAD or lambda*|t|.
double fusion_penalty_exact(PenaltyKind kind, double t, const HyperParams& hp);

/// Shrinkage factor s/|delta| of argmin_theta g~(|theta|) + (rho/2)|delta - theta|^2,
/// evaluated from |delta| alone. Four closed-form branches, first match wins.
double prox_smoothed_scad_factor(double delta_norm, const HyperParams& hp);

/// Closed-form proximal step of the smoothed SCAD group penalty. Requires
/// (a - 1) * rho > 1 when lambda > 0.
Vector prox_smoothed_scad(const Eigen::Ref<const Vector>& delta, const HyperParams& hp);

/// Group soft-threshold: max(0, 1 - lambda / (rho |delta|)) * delta.
Vector prox_group_l1(const Eigen::Ref<const Vector>& delta, double lambda, double rho);

/// theta-step for either penalty kind.
Vector prox_fusion(PenaltyKind kind, const Eigen::Ref<const Vector>& delta, const HyperParams& hp);

/// argmin_theta scad(|theta|) + (weight/2)|delta - theta|^2 by exhaustive
/// comparison of per-piece candidates; valid for any a > 1 and weight > 0.
Vector prox_scad(const Eigen::Ref<const Vector>& delta, double lambda, double a, double weight);

}  // namespace fpfc
