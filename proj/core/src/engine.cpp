#include "fpfc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "engine_internal.hpp"
#include "fpfc/clustering.hpp"
#include "fpfc/penalty.hpp"
#include "fpfc/rng.hpp"

namespace fpfc {

// ---------------------------------------------------------------------------
// Schedule pieces

std::size_t EpochRule::epochs(std::size_t device, long round) const {
  switch (kind) {
    case Kind::Constant: return std::max<std::size_t>(constant, 1);
    case Kind::PerDevice:
      if (device >= per_device.size()) throw InvalidArgument("no epoch count for device");
      return std::max<std::size_t>(per_device[device], 1);
    case Kind::GrowingCeil: {
      const double t = std::ceil(static_cast<double>(std::max(round, 1L)) / growth - 1e-12);
      return std::max<std::size_t>(static_cast<std::size_t>(t), 1);
    }
    case Kind::GrowingLinear: return static_cast<std::size_t>(std::max(round, 0L)) + 1;
  }
  return 1;
}

void EpochRule::validate(std::size_t m) const {
  if (kind == Kind::Constant && constant < 1) {
    throw InvalidArgument("schedule.local_epochs must be >= 1");
  }
  if (kind == Kind::PerDevice) {
    if (per_device.size() != m) {
      throw InvalidArgument("schedule.local_epochs lists " + std::to_string(per_device.size()) +
                            " devices, federation has " + std::to_string(m));
    }
    if (std::find(per_device.begin(), per_device.end(), 0) != per_device.end()) {
      throw InvalidArgument("schedule.local_epochs entries must be >= 1");
    }
  }
  if (kind == Kind::GrowingCeil && !(growth > 0.0 && std::isfinite(growth))) {
    throw InvalidArgument("schedule.growth must be > 0");
  }
}

EpochRule EpochRule::fixed(std::size_t t) {
  EpochRule r;
  r.constant = t;
  return r;
}

EpochRule EpochRule::listed(std::vector<std::size_t> t) {
  EpochRule r;
  r.kind = Kind::PerDevice;
  r.per_device = std::move(t);
  return r;
}

EpochRule EpochRule::growing_ceil(double c) {
  EpochRule r;
  r.kind = Kind::GrowingCeil;
  r.growth = c;
  return r;
}

EpochRule EpochRule::growing_linear() {
  EpochRule r;
  r.kind = Kind::GrowingLinear;
  return r;
}

void Participation::validate() const {
  if (kind == Kind::Uniform && !(tau > 0.0 && tau <= 1.0)) {
    throw InvalidArgument("schedule.tau must lie in (0, 1]");
  }
}

void Schedule::validate(std::size_t m) const {
  if (rounds < 0) throw InvalidArgument("schedule.rounds must be >= 0");
  epochs.validate(m);
  participation.validate();
}

DelayModel DelayModel::uniform(std::size_t m, double d_max) {
  DelayModel model;
  model.d_max.assign(m, d_max);
  return model;
}

DelayModel& DelayModel::with_stragglers(const IndexList& devices, double factor) {
  for (std::size_t i : devices) {
    if (i >= d_max.size()) throw InvalidArgument("straggler id out of range");
    d_max[i] *= factor;
  }
  return *this;
}

double DelayModel::draw(std::size_t device, std::uint64_t job, std::uint64_t seed) const {
  Rng rng = make_rng(seed, {tag(Stream::Delay), device, job});
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return d_max.at(device) * unif(rng);
}

void DelayModel::validate(std::size_t m) const {
  if (d_max.size() != m) throw InvalidArgument("delay model must list one bound per device");
  for (double d : d_max) {
    if (!(d >= 0.0 && std::isfinite(d))) throw InvalidArgument("delay bounds must be finite, >= 0");
  }
}

// ---------------------------------------------------------------------------

EngineState init_state(const Federation& fed, double rho, std::uint64_t seed, double scale) {
  const std::size_t m = fed.m();
  const std::size_t d = fed.spec.d();
  Rng rng = make_rng(seed, {tag(Stream::Init)});
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector shared(static_cast<Eigen::Index>(d));
  for (auto& v : shared) v = scale * normal(rng);

  EngineState state;
  state.omega = ModelParams::replicated(shared, m);
  state.pairwise = PairwiseState(m, d, rho);
  state.zeta = state.omega.matrix();
  state.seed = seed;
  return state;
}

IndexList sample_active(std::size_t m, const Participation& rule, long round, std::uint64_t seed) {
  IndexList all(m);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (rule.kind == Participation::Kind::Full || m == 0) return all;

  std::size_t k = 1;
  if (rule.kind == Participation::Kind::Uniform) {
    rule.validate();
    k = static_cast<std::size_t>(std::ceil(rule.tau * static_cast<double>(m) - 1e-9));
    k = std::clamp<std::size_t>(k, 1, m);
  }
  Rng rng = make_rng(seed, {tag(Stream::Sampling), static_cast<std::uint64_t>(round)});
  for (std::size_t t = 0; t < k; ++t) {
    std::uniform_int_distribution<std::size_t> pick(t, m - 1);
    std::swap(all[t], all[pick(rng)]);
  }
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

Vector local_update(const Eigen::Ref<const Vector>& omega, const Eigen::Ref<const Vector>& zeta,
                    const DeviceData& data, const ModelSpec& spec, double alpha, double rho,
                    std::size_t epochs, std::size_t device, long round, std::size_t batch_size,
                    std::uint64_t seed) {
  if (!(alpha > 0.0)) throw InvalidHyperParameter("hyperparams.alpha must be > 0");
  if (epochs < 1) throw InvalidArgument("local epochs must be >= 1");
  Vector w = omega;
  Vector g;
  const Batch& train = data.batch(Split::Train);

  auto step = [&](const Batch& b) {
    loss_and_grad(spec, w, b, g);
    if (rho != 0.0) g.noalias() += rho * (w - zeta);
    w.noalias() -= alpha * g;
    if (!w.allFinite()) throw DivergenceError(device, round, "non-finite local iterate");
  };

  if (batch_size == 0 || batch_size >= train.size()) {
    for (std::size_t t = 0; t < epochs; ++t) step(train);
    return w;
  }

  Rng rng = make_rng(seed, {tag(Stream::LocalBatch), static_cast<std::uint64_t>(round), device});
  IndexList order(train.size());
  Batch mb;
  for (std::size_t t = 0; t < epochs; ++t) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t stop = std::min(order.size(), start + batch_size);
      const auto rows = static_cast<Eigen::Index>(stop - start);
      mb.features.resize(rows, train.features.cols());
      mb.targets.resize(rows);
      for (std::size_t r = start; r < stop; ++r) {
        const auto dst = static_cast<Eigen::Index>(r - start);
        mb.features.row(dst) = train.features.row(static_cast<Eigen::Index>(order[r]));
        mb.targets(dst) = train.targets(static_cast<Eigen::Index>(order[r]));
      }
      step(mb);
    }
  }
  return w;
}

void update_pair(EngineState& state, std::size_t i, std::size_t j, const HyperParams& hp,
                 PenaltyKind kind) {
  const std::size_t lo = std::min(i, j);
  const std::size_t hi = std::max(i, j);
  const std::size_t off = pair_offset(lo, hi, state.m());
  const auto diff = state.omega.device(lo) - state.omega.device(hi);
  auto theta = state.pairwise.theta_col(off);
  auto dual = state.pairwise.dual_col(off);
  const double rho = state.pairwise.rho();
  if (rho == 0.0) {
    theta = diff;
    dual.setZero();
    return;
  }
  const Vector delta = diff + dual / rho;
  theta = prox_fusion(kind, delta, hp);
  dual += rho * (diff - theta);
}

Vector compute_zeta(const EngineState& state, std::size_t i) {
  const std::size_t m = state.m();
  const double rho = state.pairwise.rho();
  if (rho == 0.0) return state.omega.device(i);
  Vector acc = state.omega.matrix().rowwise().sum();
  const double inv_rho = 1.0 / rho;
  for (std::size_t j = 0; j < m; ++j) {
    if (j == i) continue;
    if (i < j) {
      const std::size_t off = pair_offset(i, j, m);
      acc += state.pairwise.theta_col(off) - inv_rho * state.pairwise.dual_col(off);
    } else {
      const std::size_t off = pair_offset(j, i, m);
      acc -= state.pairwise.theta_col(off) - inv_rho * state.pairwise.dual_col(off);
    }
  }
  return acc / static_cast<double>(m);
}

void recompute_zeta(EngineState& state) {
  state.zeta.resize(static_cast<Eigen::Index>(state.d()), static_cast<Eigen::Index>(state.m()));
  for (std::size_t i = 0; i < state.m(); ++i) {
    state.zeta.col(static_cast<Eigen::Index>(i)) = compute_zeta(state, i);
  }
}

void server_update(EngineState& state, const IndexList& active,
                   const std::vector<Vector>& new_omegas, const HyperParams& hp,
                   PenaltyKind kind) {
  const std::size_t m = state.m();
  if (new_omegas.size() != active.size()) {
    throw ProtocolError("server received " + std::to_string(new_omegas.size()) +
                        " models for " + std::to_string(active.size()) + " active devices");
  }
  std::vector<char> is_active(m, 0);
  for (std::size_t k = 0; k < active.size(); ++k) {
    const std::size_t i = active[k];
    if (i >= m) throw ProtocolError("active device id out of range");
    if (static_cast<std::size_t>(new_omegas[k].size()) != state.d()) {
      throw ProtocolError("model from device " + std::to_string(i) + " has wrong length");
    }
    is_active[i] = 1;
    state.omega.device(i) = new_omegas[k];
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (is_active[i] || is_active[j]) update_pair(state, i, j, hp, kind);
  recompute_zeta(state);
}

// ---------------------------------------------------------------------------

namespace detail {

MetricCache::MetricCache(const Federation& fed, bool losses, bool splits)
    : losses_(losses || splits),
      splits_(splits),
      regression_(fed.spec.kind == ModelKind::LinearRegression),
      train_loss_(fed.m(), 0.0),
      val_(fed.m(), 0.0),
      test_(fed.m(), 0.0),
      n_train_(fed.sample_sizes(Split::Train)),
      n_val_(fed.sample_sizes(Split::Validation)),
      n_test_(fed.sample_sizes(Split::Test)) {}

void MetricCache::refresh(const Federation& fed, const ModelParams& omega,
                          const IndexList& devices) {
  if (!losses_) return;
  auto split_value = [&](std::size_t i, Split s) {
    const Batch& b = fed.devices[i].batch(s);
    if (b.size() == 0) return 0.0;
    const double v = predict_metric(fed.spec, omega.device(i), b);
    return regression_ ? v * v : v;
  };
  for (std::size_t i : devices) {
    train_loss_[i] = loss(fed.spec, omega.device(i), fed.devices[i].batch(Split::Train));
    if (splits_) {
      val_[i] = split_value(i, Split::Validation);
      test_[i] = split_value(i, Split::Test);
    }
  }
}

void MetricCache::refresh_all(const Federation& fed, const ModelParams& omega) {
  IndexList all(fed.m());
  std::iota(all.begin(), all.end(), std::size_t{0});
  refresh(fed, omega, all);
}

namespace {

double weighted_mean(const std::vector<double>& v, const std::vector<double>& w) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    num += w[i] * v[i];
    den += w[i];
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

double MetricCache::pooled_train_loss() const { return weighted_mean(train_loss_, n_train_); }

double MetricCache::pooled_metric(Split s) const {
  const double v = s == Split::Test ? weighted_mean(test_, n_test_)
                                    : weighted_mean(val_, n_val_);
  return regression_ ? std::sqrt(v) : v;
}

RoundTrace make_trace(long round, const IndexList& active, const EngineState& state,
                      const MetricCache& cache, const Federation& fed, const HyperParams& hp,
                      const EngineOptions& options) {
  RoundTrace t;
  t.round = round;
  t.active_set = active;
  t.lambda_current = hp.lambda;
  t.sim_time_s = state.sim_time_s;
  if (options.track_metrics) {
    t.train_loss = cache.pooled_train_loss();
    t.val_metric = cache.pooled_metric(Split::Validation);
    t.test_metric = cache.pooled_metric(Split::Test);
  }
  if (options.track_lagrangian) {
    t.aug_lagrangian = aug_lagrangian_from_losses(state, cache.train_losses(), hp, options.penalty);
  }
  if (options.track_clusters) {
    const auto labels = cluster_labels(state.pairwise, hp.nu);
    t.num_clusters = labels.empty() ? 0 : static_cast<std::size_t>(
                                              *std::max_element(labels.begin(), labels.end()) + 1);
    if (fed.has_truth() && fed.m() >= 2) t.ari = adjusted_rand_index(labels, fed.true_labels);
  }
  return t;
}

void check_options(const Federation& fed, const HyperParams& hp, const EngineOptions& options) {
  fed.validate();
  hp.validate(options.penalty);
  if (options.penalty == PenaltyKind::GroupL1 && hp.lambda > 0.0 && !(hp.rho > 0.0)) {
    throw InvalidHyperParameter("hyperparams.rho must be > 0");
  }
  if (options.delays) options.delays->validate(fed.m());
}

}  // namespace detail

namespace {

/// Runs fn(k) for k in [0, n) on up to `threads` workers; rethrows the
/// exception of the smallest failing k so errors do not depend on timing.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](std::size_t k) {
    try {
      fn(k);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1U), n);
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) guarded(k);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < n; k += workers) guarded(k);
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

RunResult run_fpfc(EngineState initial, const Federation& fed, const HyperParams& hp,
                   const Schedule& schedule, const EngineOptions& options) {
  detail::check_options(fed, hp, options);
  schedule.validate(fed.m());
  if (initial.m() != fed.m() || initial.d() != fed.spec.d()) {
    throw InvalidArgument("engine state does not match the federation's shape");
  }
  if (schedule.participation.kind == Participation::Kind::Single) {
    throw InvalidArgument("single-device participation is only valid for the async engine");
  }

  RunResult out{std::move(initial), {}};
  EngineState& state = out.state;
  state.pairwise.set_rho(hp.rho);
  recompute_zeta(state);

  detail::MetricCache cache(fed, options.track_lagrangian, options.track_metrics);
  cache.refresh_all(fed, state.omega);
  out.traces.reserve(static_cast<std::size_t>(schedule.rounds));

  const std::uint64_t seed = state.seed;
  for (long r = 0; r < schedule.rounds; ++r) {
    const auto start = detail::Clock::now();
    const long k = state.round + 1;
    const IndexList active = sample_active(fed.m(), schedule.participation, k, seed);

    std::vector<Vector> updated(active.size());
    parallel_for(active.size(), options.threads, [&](std::size_t idx) {
      const std::size_t i = active[idx];
      updated[idx] = local_update(state.omega.device(i), state.zeta.col(static_cast<Eigen::Index>(i)),
                                  fed.devices[i], fed.spec, hp.alpha, hp.rho,
                                  schedule.epochs.epochs(i, k), i, k, options.batch_size, seed);
    });
    server_update(state, active, updated, hp, options.penalty);
    state.round = k;

    if (options.delays) {
      double slowest = 0.0;
      for (std::size_t i : active) {
        slowest = std::max(slowest, options.delays->draw(i, static_cast<std::uint64_t>(k), seed));
      }
      state.sim_time_s += slowest;
    }

    cache.refresh(fed, state.omega, active);
    RoundTrace trace = detail::make_trace(k, active, state, cache, fed, hp, options);
    if (options.wall_clock) trace.wall_ms = detail::elapsed_ms(start);
    out.traces.push_back(std::move(trace));
    if (options.observer && !options.observer(out.traces.back(), state)) break;
  }
  return out;
}

RunResult run_fpfc(const Federation& fed, const HyperParams& hp, const Schedule& schedule,
                   const EngineOptions& options, std::uint64_t seed) {
  detail::check_options(fed, hp, options);
  return run_fpfc(init_state(fed, hp.rho, seed, options.init_scale), fed, hp, schedule, options);
}

}  // namespace fpfc
