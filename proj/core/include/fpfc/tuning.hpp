#pragma once

#include <string>
#include <vector>

#include "fpfc/engine.hpp"

namespace fpfc {

struct LambdaLadder {
  std::vector<double> values;  // strictly increasing
  double advance_tol = 1e-4;   // stop a lambda once |change in validation metric| < tol
  long per_lambda_round_cap = 100;
  long min_rounds = 1;  // rounds before the tolerance test may fire

  void validate() const;
};

struct LambdaRecord {
  double lambda = 0.0;
  long rounds = 0;
  double best_val = 0.0;
};

struct TuningResult {
  double selected_lambda = 0.0;
  double best_val = 0.0;
  EngineState best_state;  // state with the best validation metric seen
  std::vector<LambdaRecord> history;
  long total_rounds = 0;
  std::vector<RoundTrace> traces;
};

/// Warm-started ladder: each lambda continues from the previous lambda's last
/// state; the climb stops after the first lambda whose best validation metric
/// is strictly worse than the best seen before it. The best lambda is then
/// resumed from the best state until the tolerance test fires or the total
/// budget schedule.rounds is spent.
TuningResult tune_warmup(const Federation& fed, const HyperParams& hp, const LambdaLadder& ladder,
                         const Schedule& schedule, const EngineOptions& options,
                         std::uint64_t seed);

/// Independent fresh-start run per lambda with the same stopping rule; lambda
/// index s > 0 uses a seed derived from (seed, s).
TuningResult tune_separate(const Federation& fed, const HyperParams& hp,
                           const LambdaLadder& ladder, const Schedule& schedule,
                           const EngineOptions& options, std::uint64_t seed);

std::string to_json(const TuningResult& result);

struct BaselineResult {
  ModelParams omega;  // per-device models (LOCAL) or m copies of the global model (FedAvg)
  Evaluation eval;
  std::vector<RoundTrace> traces;
};

/// Independent per-device gradient descent, rounds * epochs steps, from the
/// engine's common start.
BaselineResult run_local_baseline(const Federation& fed, long rounds, std::size_t epochs,
                                  double alpha, std::uint64_t seed, double init_scale = 0.01);

/// Weighted averaging: sampled devices run plain local descent from the global
/// model, which is replaced by the training-size-weighted mean of their results.
BaselineResult run_fedavg(const Federation& fed, long rounds, std::size_t epochs, double alpha,
                          const Participation& participation, std::uint64_t seed,
                          double init_scale = 0.01);

/// sum_i w_i x_i / sum_i w_i.
Vector weighted_average(const std::vector<Vector>& models, const std::vector<double>& weights);

}  // namespace fpfc
