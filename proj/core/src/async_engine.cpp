#include <queue>
#include <tuple>

#include "engine_internal.hpp"
#include "fpfc/engine.hpp"

namespace fpfc {

namespace {

struct Event {
  double time;
  std::size_t device;
  std::uint64_t job;

  // Min-heap order on (time, device).
  bool operator>(const Event& o) const {
    return std::tie(time, device) > std::tie(o.time, o.device);
  }
};

}  // namespace

RunResult run_async_fpfc(const Federation& fed, const HyperParams& hp, long events,
                         const EpochRule& epochs, const EngineOptions& options,
                         std::uint64_t seed, double time_limit_s) {
  detail::check_options(fed, hp, options);
  epochs.validate(fed.m());
  if (!options.delays) throw InvalidArgument("the async engine requires a delay model");
  if (events < 0) throw InvalidArgument("schedule.rounds must be >= 0");
  const DelayModel& delays = *options.delays;
  const std::size_t m = fed.m();

  RunResult out{init_state(fed, hp.rho, seed, options.init_scale), {}};
  EngineState& state = out.state;
  recompute_zeta(state);
  detail::MetricCache cache(fed, options.track_lagrangian, options.track_metrics);
  cache.refresh_all(fed, state.omega);

  // A device's job reads (omega_i, zeta_i) at dispatch. Neither changes until
  // that same device's completion is processed, so the update is evaluated
  // when the event fires.
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
  for (std::size_t i = 0; i < m; ++i) queue.push({delays.draw(i, 0, seed), i, 0});

  while (state.round < events && !queue.empty()) {
    const Event ev = queue.top();
    if (time_limit_s > 0.0 && ev.time > time_limit_s) break;
    queue.pop();
    const auto start = detail::Clock::now();
    const long k = state.round + 1;
    const std::size_t i = ev.device;

    Vector updated = local_update(state.omega.device(i), state.zeta.col(static_cast<Eigen::Index>(i)),
                                  fed.devices[i], fed.spec, hp.alpha, hp.rho,
                                  epochs.epochs(i, static_cast<long>(ev.job) + 1), i, k,
                                  options.batch_size, seed);
    state.omega.device(i) = updated;
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) update_pair(state, i, j, hp, options.penalty);
    state.zeta.col(static_cast<Eigen::Index>(i)) = compute_zeta(state, i);
    state.round = k;
    state.sim_time_s = ev.time;
    queue.push({ev.time + delays.draw(i, ev.job + 1, seed), i, ev.job + 1});

    cache.refresh(fed, state.omega, {i});
    RoundTrace trace = detail::make_trace(k, {i}, state, cache, fed, hp, options);
    if (options.wall_clock) trace.wall_ms = detail::elapsed_ms(start);
    out.traces.push_back(std::move(trace));
    if (options.observer && !options.observer(out.traces.back(), state)) break;
  }
  return out;
}

}  // namespace fpfc
