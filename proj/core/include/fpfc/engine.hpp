#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "fpfc/data.hpp"
#include "fpfc/losses.hpp"
#include "fpfc/types.hpp"

namespace fpfc {

struct EngineState {
  ModelParams omega;
  PairwiseState pairwise;
  Matrix zeta;  // d x m server aggregates
  long round = 0;
  std::uint64_t seed = 0;
  double sim_time_s = 0.0;

  std::size_t m() const noexcept { return omega.m(); }
  std::size_t d() const noexcept { return omega.d(); }
};

/// Local epochs per (device, round).
struct EpochRule {
  enum class Kind { Constant, PerDevice, GrowingCeil, GrowingLinear };
  Kind kind = Kind::Constant;
  std::size_t constant = 10;
  std::vector<std::size_t> per_device;
  double growth = 1.0;  // GrowingCeil: T = ceil(k / growth)

  /// Round k counts from 1 for the growing rules. Never returns 0.
  std::size_t epochs(std::size_t device, long round) const;
  void validate(std::size_t m) const;

  static EpochRule fixed(std::size_t t);
  static EpochRule listed(std::vector<std::size_t> t);
  static EpochRule growing_ceil(double c);
  static EpochRule growing_linear();  // T = k + 1
};

struct Participation {
  enum class Kind { Full, Uniform, Single };
  Kind kind = Kind::Full;
  double tau = 1.0;

  void validate() const;
  static Participation full() { return {}; }
  static Participation uniform(double tau) { return {Kind::Uniform, tau}; }
};

struct Schedule {
  long rounds = 1;
  EpochRule epochs;
  Participation participation;
  void validate(std::size_t m) const;
};

/// Simulated per-job compute time: Uniform[0, d_max[i]] per job, drawn from a
/// per-(device, job) substream.
struct DelayModel {
  std::vector<double> d_max;

  static DelayModel uniform(std::size_t m, double d_max);
  /// Multiplies the bound of the listed devices by `factor`.
  DelayModel& with_stragglers(const IndexList& devices, double factor);
  double draw(std::size_t device, std::uint64_t job, std::uint64_t seed) const;
  void validate(std::size_t m) const;
};

enum class ContractionVariant { SmoothnessWithProx, SmoothnessLossOnly };

struct EngineOptions {
  PenaltyKind penalty = PenaltyKind::SmoothedSCAD;
  std::size_t batch_size = 0;  // 0: full-batch gradient descent
  unsigned threads = 1;
  double init_scale = 0.01;
  bool track_metrics = true;      // train loss, validation and test metrics
  bool track_lagrangian = true;
  bool track_clusters = true;     // num_clusters and ARI at threshold hp.nu
  bool wall_clock = false;        // record real elapsed time in wall_ms
  std::optional<DelayModel> delays;
  /// Called after every recorded round; returning false stops the run.
  std::function<bool(const RoundTrace&, const EngineState&)> observer;
};

struct RunResult {
  EngineState state;
  std::vector<RoundTrace> traces;
};

/// Common start: one N(0, scale^2) vector replicated to all devices,
/// theta = v = 0, zeta_i = omega_i.
EngineState init_state(const Federation& fed, double rho, std::uint64_t seed, double scale = 0.01);

/// Sorted active device ids for round k.
IndexList sample_active(std::size_t m, const Participation& rule, long round, std::uint64_t seed);

/// T iterations of omega <- omega - alpha * (grad f_i(omega) + rho * (omega - zeta)).
/// batch_size > 0 switches to mini-batch steps over a seeded per-epoch shuffle.
/// Throws DivergenceError on a non-finite iterate.
Vector local_update(const Eigen::Ref<const Vector>& omega, const Eigen::Ref<const Vector>& zeta,
                    const DeviceData& data, const ModelSpec& spec, double alpha, double rho,
                    std::size_t epochs, std::size_t device = 0, long round = 0,
                    std::size_t batch_size = 0, std::uint64_t seed = 0);

/// Writes the active devices' new parameters, then refreshes theta and v for
/// every pair with at least one active endpoint and recomputes zeta for all
/// devices. `new_omegas` is aligned with `active`.
void server_update(EngineState& state, const IndexList& active,
                   const std::vector<Vector>& new_omegas, const HyperParams& hp,
                   PenaltyKind kind);

/// Pair (i, j) theta/v refresh from the current omega.
void update_pair(EngineState& state, std::size_t i, std::size_t j, const HyperParams& hp,
                 PenaltyKind kind);

/// zeta_i = (1/m) sum_j (omega_j + theta_ij - v_ij / rho); omega_i when rho == 0.
Vector compute_zeta(const EngineState& state, std::size_t i);
void recompute_zeta(EngineState& state);

/// Synchronous rounds from a fresh start.
RunResult run_fpfc(const Federation& fed, const HyperParams& hp, const Schedule& schedule,
                   const EngineOptions& options, std::uint64_t seed);

/// Synchronous rounds continuing from `initial` (warm start); round numbers
/// continue from initial.round.
RunResult run_fpfc(EngineState initial, const Federation& fed, const HyperParams& hp,
                   const Schedule& schedule, const EngineOptions& options);

/// Event-driven variant: every device always has one job in flight; each
/// completion updates the pairs touching that device and its zeta only.
/// `events` bounds the number of server updates; `time_limit_s` (if > 0)
/// bounds simulated time. options.delays is required.
RunResult run_async_fpfc(const Federation& fed, const HyperParams& hp, long events,
                         const EpochRule& epochs, const EngineOptions& options,
                         std::uint64_t seed, double time_limit_s = 0.0);

// ---------------------------------------------------------------------------
// Diagnostics

struct Evaluation {
  double train_loss = 0.0;  // sample-weighted mean training loss
  double val_metric = 0.0;  // pooled accuracy or RMSE
  double test_metric = 0.0;
};

Evaluation evaluate(const Federation& fed, const ModelParams& omega);

/// sum_i f_i(omega_i) + (1/2m) sum_{i,j} g(|omega_i - omega_j|) with exact SCAD
/// (or lambda*|t| for the group-l1 kind).
double objective(const ModelParams& omega, const Federation& fed, const HyperParams& hp,
                 PenaltyKind kind = PenaltyKind::SmoothedSCAD);

/// Augmented Lagrangian over all ordered pairs, diagonal included.
double aug_lagrangian(const EngineState& state, const Federation& fed, const HyperParams& hp,
                      PenaltyKind kind = PenaltyKind::SmoothedSCAD);

/// Same value given the per-device training losses, skipping their evaluation.
double aug_lagrangian_from_losses(const EngineState& state, const std::vector<double>& losses,
                                  const HyperParams& hp, PenaltyKind kind);

struct StationarityResiduals {
  double grad_norm_sq = 0.0;
  double prox_residual_sq = 0.0;
  double feasibility_sq = 0.0;
};

StationarityResiduals stationarity_residuals(const EngineState& state, const Federation& fed,
                                             const HyperParams& hp);

/// c = 1 - alpha * 2 mu K / (L_f + rho + mu), mu = rho - L_minus, with
/// K = L_f + rho (SmoothnessWithProx) or K = L_f (SmoothnessLossOnly). Throws unless c in (0, 1).
double contraction_factor(double alpha, double rho, double l_f, double l_minus,
                          ContractionVariant variant = ContractionVariant::SmoothnessWithProx);

/// ceil(2 log(eps / (1 + eps)) / log c), at least 1.
std::size_t epochs_for_contraction(double epsilon, double c);

std::size_t inexactness_epochs(double epsilon, double alpha, double rho, double l_f,
                               double l_minus,
                               ContractionVariant variant = ContractionVariant::SmoothnessWithProx);

/// eps = 1 / (c^(-T/2) - 1), the accuracy guaranteed by T epochs.
double relative_accuracy(std::size_t epochs, double c);

struct FeasibilityReport {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Checks the sufficient conditions for monotone descent of the augmented
/// Lagrangian: T > -2 log 2 / log c, 0 < alpha <= 1 / (L_f + 2 rho - L_minus),
/// rho > max{L_f / (1 - 2 c^(T/2)), 2 lambda / xi, 2 / (a - 1), L_minus}.
FeasibilityReport descent_conditions(const HyperParams& hp, std::size_t epochs, double l_f,
                                     double l_minus,
                                     ContractionVariant variant = ContractionVariant::SmoothnessWithProx);

}  // namespace fpfc
