#include "fpfc/tuning.hpp"

#include <cmath>
#include <optional>

#include <nlohmann/json.hpp>

#include "fpfc/rng.hpp"

namespace fpfc {

void LambdaLadder::validate() const {
  if (values.empty()) throw InvalidArgument("tuning.ladder must not be empty");
  for (std::size_t s = 0; s < values.size(); ++s) {
    if (!(std::isfinite(values[s]) && values[s] >= 0.0)) {
      throw InvalidArgument("tuning.ladder values must be finite and >= 0");
    }
    if (s > 0 && !(values[s] > values[s - 1])) {
      throw InvalidArgument("tuning.ladder must be strictly increasing");
    }
  }
  if (!(advance_tol > 0.0)) throw InvalidArgument("tuning.advance_tol must be > 0");
  if (per_lambda_round_cap < 1) throw InvalidArgument("tuning.round_cap must be >= 1");
  if (min_rounds < 1) throw InvalidArgument("tuning.min_rounds must be >= 1");
}

namespace {

/// Tracks the best validation metric (direction-aware) and the state it came from.
class BestTracker {
 public:
  explicit BestTracker(bool higher_is_better) : higher_(higher_is_better) {}

  bool better(double candidate, std::optional<double> reference) const {
    if (!reference) return true;
    return higher_ ? candidate > *reference : candidate < *reference;
  }

  bool offer(double val, double lambda, const EngineState& state) {
    if (!better(val, best_)) return false;
    best_ = val;
    lambda_ = lambda;
    state_ = state;
    return true;
  }

  std::optional<double> best() const { return best_; }
  double lambda() const { return lambda_; }
  const EngineState& state() const { return state_; }

 private:
  bool higher_;
  std::optional<double> best_;
  double lambda_ = 0.0;
  EngineState state_;
};

struct PhaseOutcome {
  EngineState state;
  long rounds = 0;
  std::optional<double> best_val;
  double last_val = 0.0;
};

/// Runs one lambda from `start` until the validation change drops below the
/// tolerance (after min_rounds) or `cap` rounds pass.
PhaseOutcome run_phase(EngineState start, double start_val, const Federation& fed,
                       HyperParams hp, double lambda, long cap, const LambdaLadder& ladder,
                       const Schedule& schedule, const EngineOptions& options,
                       BestTracker& tracker, std::vector<RoundTrace>& traces) {
  hp.lambda = lambda;
  Schedule sched = schedule;
  sched.rounds = cap;

  PhaseOutcome out;
  double prev = start_val;
  EngineOptions opts = options;
  opts.observer = [&](const RoundTrace& t, const EngineState& s) {
    ++out.rounds;
    const double val = t.val_metric;
    if (tracker.better(val, out.best_val)) out.best_val = val;
    tracker.offer(val, lambda, s);
    const bool settled = out.rounds >= ladder.min_rounds && std::abs(val - prev) < ladder.advance_tol;
    prev = val;
    out.last_val = val;
    bool keep = !settled;
    if (options.observer && !options.observer(t, s)) keep = false;
    return keep;
  };
  opts.track_metrics = true;
  RunResult run = run_fpfc(std::move(start), fed, hp, sched, opts);
  if (out.rounds == 0) out.last_val = start_val;
  out.state = std::move(run.state);
  traces.insert(traces.end(), std::make_move_iterator(run.traces.begin()),
                std::make_move_iterator(run.traces.end()));
  return out;
}

void check_tuning(const Federation& fed, const HyperParams& hp, const LambdaLadder& ladder,
                  const Schedule& schedule, const EngineOptions& options) {
  ladder.validate();
  fed.validate();
  schedule.validate(fed.m());
  for (double lambda : ladder.values) {
    HyperParams probe = hp;
    probe.lambda = lambda;
    probe.validate(options.penalty);
  }
}

}  // namespace

TuningResult tune_warmup(const Federation& fed, const HyperParams& hp, const LambdaLadder& ladder,
                         const Schedule& schedule, const EngineOptions& options,
                         std::uint64_t seed) {
  check_tuning(fed, hp, ladder, schedule, options);
  TuningResult result;
  BestTracker tracker(fed.spec.higher_is_better());

  EngineState state = init_state(fed, hp.rho, seed, options.init_scale);
  double prev_val = evaluate(fed, state.omega).val_metric;
  const long budget = schedule.rounds;
  long used = 0;

  for (double lambda : ladder.values) {
    if (used >= budget) break;
    const std::optional<double> best_before = tracker.best();
    const long cap = std::min(ladder.per_lambda_round_cap, budget - used);
    PhaseOutcome phase = run_phase(std::move(state), prev_val, fed, hp, lambda, cap, ladder,
                                   schedule, options, tracker, result.traces);
    used += phase.rounds;
    prev_val = phase.last_val;
    state = std::move(phase.state);
    result.history.push_back({lambda, phase.rounds, phase.best_val.value_or(prev_val)});
    if (best_before && phase.best_val && !tracker.better(*phase.best_val, best_before) &&
        *phase.best_val != *best_before) {
      break;  // strictly worse than the best so far
    }
  }

  if (used < budget && tracker.best()) {
    EngineState resume = tracker.state();
    resume.round = state.round;
    const double lambda = tracker.lambda();
    PhaseOutcome phase = run_phase(std::move(resume), *tracker.best(), fed, hp, lambda,
                                   budget - used, ladder, schedule, options, tracker,
                                   result.traces);
    used += phase.rounds;
    result.history.push_back({lambda, phase.rounds, phase.best_val.value_or(*tracker.best())});
  }

  result.total_rounds = used;
  if (tracker.best()) {
    result.best_val = *tracker.best();
    result.selected_lambda = tracker.lambda();
    result.best_state = tracker.state();
  } else {
    result.best_val = prev_val;
    result.selected_lambda = ladder.values.front();
    result.best_state = std::move(state);
  }
  return result;
}

TuningResult tune_separate(const Federation& fed, const HyperParams& hp,
                           const LambdaLadder& ladder, const Schedule& schedule,
                           const EngineOptions& options, std::uint64_t seed) {
  check_tuning(fed, hp, ladder, schedule, options);
  TuningResult result;
  BestTracker tracker(fed.spec.higher_is_better());
  long used = 0;

  for (std::size_t s = 0; s < ladder.values.size(); ++s) {
    const std::uint64_t run_seed = s == 0 ? seed : derive_seed(seed, {tag(Stream::Tuning), s});
    EngineState state = init_state(fed, hp.rho, run_seed, options.init_scale);
    state.round = used;
    const double start_val = evaluate(fed, state.omega).val_metric;
    PhaseOutcome phase = run_phase(std::move(state), start_val, fed, hp, ladder.values[s],
                                   ladder.per_lambda_round_cap, ladder, schedule, options,
                                   tracker, result.traces);
    used += phase.rounds;
    result.history.push_back({ladder.values[s], phase.rounds, phase.best_val.value_or(start_val)});
  }

  result.total_rounds = used;
  result.best_val = tracker.best().value_or(0.0);
  result.selected_lambda = tracker.lambda();
  result.best_state = tracker.state();
  return result;
}

std::string to_json(const TuningResult& r) {
  nlohmann::json j;
  j["selected_lambda"] = r.selected_lambda;
  j["best_val"] = r.best_val;
  j["total_rounds"] = r.total_rounds;
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& h : r.history) {
    hist.push_back({{"lambda", h.lambda}, {"rounds", h.rounds}, {"best_val", h.best_val}});
  }
  j["history"] = hist;
  return j.dump(2);
}

// ---------------------------------------------------------------------------

Vector weighted_average(const std::vector<Vector>& models, const std::vector<double>& weights) {
  if (models.empty() || models.size() != weights.size()) {
    throw InvalidArgument("weighted average needs one weight per model");
  }
  Vector acc = Vector::Zero(models.front().size());
  double total = 0.0;
  for (std::size_t k = 0; k < models.size(); ++k) {
    acc += weights[k] * models[k];
    total += weights[k];
  }
  if (!(total > 0.0)) throw InvalidArgument("weights must sum to a positive value");
  return acc / total;
}

namespace {

RoundTrace baseline_trace(long round, IndexList active, const Evaluation& e) {
  RoundTrace t;
  t.round = round;
  t.active_set = std::move(active);
  t.train_loss = e.train_loss;
  t.val_metric = e.val_metric;
  t.test_metric = e.test_metric;
  return t;
}

}  // namespace

BaselineResult run_local_baseline(const Federation& fed, long rounds, std::size_t epochs,
                                  double alpha, std::uint64_t seed, double init_scale) {
  fed.validate();
  if (rounds < 0) throw InvalidArgument("schedule.rounds must be >= 0");
  BaselineResult out;
  out.omega = init_state(fed, 0.0, seed, init_scale).omega;
  IndexList all(fed.m());
  for (std::size_t i = 0; i < fed.m(); ++i) all[i] = i;
  for (long k = 1; k <= rounds; ++k) {
    for (std::size_t i = 0; i < fed.m(); ++i) {
      const Vector w = out.omega.device(i);
      out.omega.device(i) = local_update(w, w, fed.devices[i], fed.spec, alpha, 0.0, epochs, i, k);
    }
    out.traces.push_back(baseline_trace(k, all, evaluate(fed, out.omega)));
  }
  out.eval = evaluate(fed, out.omega);
  return out;
}

BaselineResult run_fedavg(const Federation& fed, long rounds, std::size_t epochs, double alpha,
                          const Participation& participation, std::uint64_t seed,
                          double init_scale) {
  fed.validate();
  participation.validate();
  if (rounds < 0) throw InvalidArgument("schedule.rounds must be >= 0");
  const std::vector<double> sizes = fed.sample_sizes(Split::Train);
  Vector global = init_state(fed, 0.0, seed, init_scale).omega.device(0);

  BaselineResult out;
  for (long k = 1; k <= rounds; ++k) {
    const IndexList active = sample_active(fed.m(), participation, k, seed);
    std::vector<Vector> models;
    std::vector<double> weights;
    for (std::size_t i : active) {
      models.push_back(local_update(global, global, fed.devices[i], fed.spec, alpha, 0.0, epochs,
                                    i, k));
      weights.push_back(sizes[i]);
    }
    global = weighted_average(models, weights);
    out.traces.push_back(
        baseline_trace(k, active, evaluate(fed, ModelParams::replicated(global, fed.m()))));
  }
  out.omega = ModelParams::replicated(global, fed.m());
  out.eval = evaluate(fed, out.omega);
  return out;
}

}  // namespace fpfc
