#include <benchmark/benchmark.h>

#include <random>

#include "fpfc/clustering.hpp"
#include "fpfc/data.hpp"
#include "fpfc/engine.hpp"
#include "fpfc/penalty.hpp"

namespace {

fpfc::HyperParams bench_hp() {
  fpfc::HyperParams hp;
  hp.lambda = 1.0;
  hp.a = 3.7;
  hp.xi = 1e-4;
  hp.rho = 1.0;
  hp.alpha = 0.5;
  hp.nu = 0.1;
  return hp;
}

fpfc::Federation bench_federation(std::size_t m, std::size_t max_samples) {
  fpfc::SyntheticOptions o;
  o.cluster_sizes = {m / 2, m - m / 2};
  o.min_samples = 250;
  o.max_samples = max_samples;
  return fpfc::gen_synthetic(o, 1);
}

void BM_ProxSmoothedScad(benchmark::State& state) {
  const auto d = state.range(0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  fpfc::Vector delta(d);
  for (auto& v : delta) v = n(rng);
  delta *= 2.0 / delta.norm();  // middle branch
  const auto hp = bench_hp();
  for (auto _ : state) benchmark::DoNotOptimize(fpfc::prox_smoothed_scad(delta, hp));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ProxSmoothedScad)->Arg(10)->Arg(610);

// One server step with every device active: m(m-1)/2 pair updates plus zeta.
void BM_ServerUpdate(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto fed = bench_federation(m, 300);
  const auto hp = bench_hp();
  auto s = fpfc::init_state(fed, hp.rho, 1, 1.0);
  fpfc::IndexList active(m);
  std::vector<fpfc::Vector> omegas;
  for (std::size_t i = 0; i < m; ++i) {
    active[i] = i;
    omegas.push_back(s.omega.device(i) + fpfc::Vector::Constant(static_cast<Eigen::Index>(s.d()), 0.01 * i));
  }
  for (auto _ : state) {
    fpfc::server_update(s, active, omegas, hp, fpfc::PenaltyKind::SmoothedSCAD);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(m * (m - 1) / 2));
}
BENCHMARK(BM_ServerUpdate)->Arg(20)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_LocalUpdate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  fpfc::SyntheticOptions o;
  o.cluster_sizes = {1};
  o.min_samples = n;
  o.max_samples = n;
  const auto fed = fpfc::gen_synthetic(o, 2);
  const auto start = fpfc::init_state(fed, 1.0, 2);
  const fpfc::Vector w = start.omega.device(0), z = start.zeta.col(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fpfc::local_update(w, z, fed.devices[0], fed.spec, 0.5, 1.0, 10));
  }
  state.counters["samples"] = static_cast<double>(fed.devices[0].batch(fpfc::Split::Train).size());
}
BENCHMARK(BM_LocalUpdate)->Arg(250)->Arg(2500)->Arg(25000)->Unit(benchmark::kMillisecond);

void BM_SyncRound(benchmark::State& state) {
  const auto fed = bench_federation(static_cast<std::size_t>(state.range(0)), 1000);
  const auto hp = bench_hp();
  fpfc::Schedule s;
  s.rounds = 1;
  s.epochs = fpfc::EpochRule::fixed(10);
  s.participation = fpfc::Participation::uniform(0.3);
  fpfc::EngineOptions o;
  o.track_lagrangian = o.track_clusters = false;
  auto st = fpfc::init_state(fed, hp.rho, 3);
  for (auto _ : state) st = fpfc::run_fpfc(std::move(st), fed, hp, s, o).state;
}
BENCHMARK(BM_SyncRound)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ClusterLabels(benchmark::State& state) {
  const auto m = state.range(0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  fpfc::Matrix dist(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) dist(i, j) = dist(j, i) = i == j ? 0.0 : u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(fpfc::cluster_labels(dist, 0.01));
}
BENCHMARK(BM_ClusterLabels)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
