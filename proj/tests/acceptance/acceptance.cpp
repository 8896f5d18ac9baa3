// Acceptance harness: one PASS/FAIL line per criterion.
//
//   fpfc_acceptance [--strict] [N | N-M]...
//
// With no selection every criterion runs. Exit status is 0 when every selected
// criterion was evaluated; --strict additionally turns any FAIL into exit 1.
// An exception inside a criterion is reported as FAIL and exits 2.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "fpfc/experiment.hpp"
#include "fpfc/penalty.hpp"
#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

namespace fs = std::filesystem;
using fpfc::Vector;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fpfc::ExperimentConfig config(const std::string& name) {
  return fpfc::load_config(fs::path(FPFC_CONFIG_DIR) / name);
}

fpfc::HyperParams random_scad_hp(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  fpfc::HyperParams hp;
  hp.lambda = 0.05 + 3.0 * u(rng);
  hp.a = 2.2 + 3.0 * u(rng);
  hp.xi = hp.lambda * (0.001 + 0.8 * u(rng));
  // Strict convexity margin keeps the 1-D oracle well conditioned.
  hp.rho = (1.0 / (hp.a - 1.0)) * (1.1 + 4.0 * u(rng));
  return hp;
}

Vector random_delta(std::mt19937_64& rng, double scale) {
  std::uniform_int_distribution<int> dim(1, 6);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> r(0.0, scale);
  Vector v(dim(rng));
  for (auto& x : v) x = n(rng);
  return v * (r(rng) / v.norm());
}

// ---------------------------------------------------------------------------

Verdict c1_prox_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const bool l1 = k % 2 == 1;
    fpfc::HyperParams hp = random_scad_hp(rng);
    const Vector delta = random_delta(rng, 1.5 * hp.a * hp.lambda + 2.0 * hp.lambda / hp.rho);
    const double r = delta.norm();
    Vector got;
    std::function<double(double)> obj;
    if (l1) {
      got = fpfc::prox_group_l1(delta, hp.lambda, hp.rho);
      obj = [&](double s) { return hp.lambda * s + 0.5 * hp.rho * (s - r) * (s - r); };
    } else {
      got = fpfc::prox_smoothed_scad(delta, hp);
      obj = [&](double s) {
        return oracle::smoothed_scad(s, hp.lambda, hp.a, hp.xi) + 0.5 * hp.rho * (s - r) * (s - r);
      };
    }
    const double s = oracle::minimize_1d(obj, 0.0, r, 20000);
    const Vector want = r > 0.0 ? Vector((s / r) * delta) : delta;
    worst = std::max(worst, (got - want).norm());
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs < 10.0,
          "max |prox - oracle| = " + fmt("%.2e", worst) + " over 1000 draws, " + fmt("%.2f", secs) + " s"};
}

Verdict c2_sandwich_lipschitz() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long violations = 0, checks = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const double lambda = 0.05 + 3.0 * u(rng);
    const double a = 1.5 + 5.0 * u(rng);
    const double xi = lambda * (0.001 + 0.9 * u(rng));
    const double lip = std::max(lambda / xi, 1.0 / (a - 1.0));
    const int n = 5000;
    const double span = 1.5 * a * lambda;
    double prev_t = 0.0, prev_d = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double t = span * k / n;
      const double s = fpfc::smoothed_scad(t, lambda, a, xi);
      const double p = oracle::scad(t, lambda, a);
      const double d = fpfc::smoothed_scad_deriv(t, lambda, a, xi);
      checks += 3;
      violations += !(p <= s + 1e-12);
      violations += !(s <= p + xi * lambda / 2.0 + 1e-12);
      if (k > 0) violations += !(std::abs(d - prev_d) <= lip * (t - prev_t) * (1 + 1e-9) + 1e-12);
      prev_t = t;
      prev_d = d;
    }
  }
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(checks) +
                               " grid checks over 20 triples"};
}

Verdict c3_gradients() {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  int count = 0;
  for (int rep = 0; rep < 50; ++rep) {
    for (bool softmax : {true, false}) {
      const std::size_t p = 2 + rng() % 5, n = 5 + rng() % 20, classes = 2 + rng() % 4;
      std::normal_distribution<double> g(0.0, 1.0);
      fpfc::Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
      for (auto& v : x.reshaped()) v = g(rng);
      Vector y(static_cast<Eigen::Index>(n));
      for (auto& v : y) v = softmax ? static_cast<double>(rng() % classes) : g(rng);
      const fpfc::ModelSpec spec =
          softmax ? fpfc::ModelSpec::softmax(p, classes) : fpfc::ModelSpec::linear(p, rep % 2 == 0);
      const fpfc::Batch batch{x, y};
      Vector w(static_cast<Eigen::Index>(spec.d()));
      for (auto& v : w) v = 0.5 * g(rng);
      const Vector an = fpfc::grad(spec, w, batch);
      const Vector fd = oracle::finite_difference(
          [&](const Eigen::VectorXd& z) { return fpfc::loss(spec, z, batch); }, w, 1e-6);
      worst = std::max(worst, (an - fd).norm() / std::max(1e-8, fd.norm()));
      ++count;
    }
  }
  return {worst <= 1e-5, "max relative error " + fmt("%.2e", worst) + " over " + std::to_string(count) +
                             " instances (50 softmax, 50 linear)"};
}

Verdict c4_inexactness() {
  const auto fed = fixture::small_regression(10, 2, 404, 60, 4);
  const std::size_t m = fed.m();
  std::vector<fixture::Quadratic> q;
  std::vector<double> lf(m);
  double lmax = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    q.push_back(fixture::quadratic_of(fed, i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q[i].h);
    lf[i] = es.eigenvalues().maxCoeff();
    lmax = std::max(lmax, lf[i]);
  }
  fpfc::HyperParams hp;
  hp.lambda = 0.3;
  hp.xi = 1e-3;
  hp.a = 3.7;
  hp.rho = 1.0;
  hp.alpha = 1.0 / (lmax + hp.rho);
  std::mt19937_64 rng(4);
  std::vector<double> eps(m);
  std::vector<std::size_t> epochs(m);
  for (std::size_t i = 0; i < m; ++i) {
    eps[i] = 0.05 + 0.9 * std::uniform_real_distribution<double>(0, 1)(rng);
    epochs[i] = fpfc::inexactness_epochs(eps[i], hp.alpha, hp.rho, lf[i], 0.0);
  }
  fpfc::Schedule one;
  one.rounds = 1;
  one.epochs = fpfc::EpochRule::listed(epochs);
  one.participation = fpfc::Participation::uniform(0.5);
  fpfc::EngineOptions opts;
  opts.track_metrics = opts.track_lagrangian = opts.track_clusters = false;

  fpfc::EngineState state = fpfc::init_state(fed, hp.rho, 44);
  long events = 0, held = 0;
  while (events < 500) {
    const auto active = fpfc::sample_active(m, one.participation, state.round + 1, state.seed);
    const fpfc::EngineState before = state;
    state = fpfc::run_fpfc(std::move(state), fed, hp, one, opts).state;
    for (std::size_t i : active) {
      if (events == 500) break;
      const Vector zeta = before.zeta.col(static_cast<Eigen::Index>(i));
      const Eigen::MatrixXd h = q[i].h + hp.rho * Eigen::MatrixXd::Identity(q[i].h.rows(), q[i].h.cols());
      const Vector exact = h.ldlt().solve(q[i].b + hp.rho * zeta);
      const Vector next = state.omega.device(i), prev = before.omega.device(i);
      held += (next - exact).norm() <= eps[i] * (next - prev).norm() + 1e-9;
      ++events;
    }
  }
  const double frac = static_cast<double>(held) / static_cast<double>(events);
  return {frac >= 0.99, "bound held in " + std::to_string(held) + "/" + std::to_string(events) +
                            " events (" + fmt("%.1f", 100 * frac) + "%)"};
}

Verdict c5_descent() {
  const auto fed = fixture::small_regression(8, 2, 505, 80, 3);
  double lf = 0.0;
  for (std::size_t i = 0; i < fed.m(); ++i) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fixture::quadratic_of(fed, i).h);
    lf = std::max(lf, es.eigenvalues().maxCoeff());
  }
  fpfc::HyperParams hp;
  hp.a = 3.7;
  hp.lambda = 0.1;
  hp.xi = 0.05;
  hp.rho = std::max({3.0 * lf, 2.0 * hp.lambda / hp.xi, 2.0 / (hp.a - 1.0)}) + 0.01;
  hp.alpha = 1.0 / (lf + 2.0 * hp.rho);
  const double c = fpfc::contraction_factor(hp.alpha, hp.rho, lf, 0.0);
  const auto t = static_cast<std::size_t>(std::ceil(-2.0 * std::log(3.0) / std::log(c)));
  const auto feasible = fpfc::descent_conditions(hp, t, lf, 0.0);
  if (!feasible.ok) return {false, "settings infeasible: " + feasible.violations.front()};

  fpfc::Schedule s;
  s.rounds = 200;
  s.epochs = fpfc::EpochRule::fixed(t);
  s.participation = fpfc::Participation::full();
  fpfc::EngineOptions o;
  o.track_clusters = false;
  const auto r = fpfc::run_fpfc(fed, hp, s, o, 5);
  double prev = fpfc::aug_lagrangian(fpfc::init_state(fed, hp.rho, 5), fed, hp);
  int increases = 0;
  double worst = 0.0;
  for (const auto& tr : r.traces) {
    const double rise = (tr.aug_lagrangian - prev) / std::max(1.0, std::abs(prev));
    worst = std::max(worst, rise);
    increases += rise > 1e-8;
    prev = tr.aug_lagrangian;
  }
  return {increases == 0 && r.traces.size() == 200,
          std::to_string(increases) + " increases over " + std::to_string(r.traces.size()) +
              " rounds (T = " + std::to_string(t) + ", max relative rise " + fmt("%.1e", worst) + ")"};
}

Verdict c6_stationarity() {
  auto cfg = config("s1_fpfc_fixed.json");
  const std::uint64_t seed = cfg.seeds.front();
  const auto fed = fpfc::build_federation(cfg, seed);
  cfg.schedule.rounds = 400;
  fpfc::EngineOptions o;
  o.track_metrics = o.track_lagrangian = o.track_clusters = false;
  std::vector<double> residual;
  o.observer = [&](const fpfc::RoundTrace&, const fpfc::EngineState& s) {
    residual.push_back(fpfc::stationarity_residuals(s, fed, cfg.hp).grad_norm_sq);
    return true;
  };
  fpfc::run_fpfc(fed, cfg.hp, cfg.schedule, o, seed);
  std::vector<double> lx, ly;
  std::string detail = "avg |grad L0|^2:";
  bool decreasing = true;
  for (std::size_t k : {50u, 100u, 200u, 400u}) {
    const double avg = std::accumulate(residual.begin(), residual.begin() + k, 0.0) / k;
    if (!ly.empty()) decreasing &= std::log(avg) < ly.back();
    lx.push_back(std::log(static_cast<double>(k)));
    ly.push_back(std::log(avg));
    detail += " K=" + std::to_string(k) + " " + fmt("%.3e", avg);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / 4, my = std::accumulate(ly.begin(), ly.end(), 0.0) / 4;
  double sxy = 0, sxx = 0;
  for (int k = 0; k < 4; ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  const double slope = sxy / sxx;
  return {decreasing && slope >= -1.5 && slope <= -0.5, detail + "; log-log slope " + fmt("%.3f", slope)};
}

Verdict c7_determinism() {
  const fs::path root = fs::temp_directory_path() / "fpfc_acceptance_c7";
  std::vector<std::string> names = {"linear_fpfc.json", "async_stragglers.json", "s1_fpfc_fixed.json"};
  int identical = 0, total = 0;
  for (const auto& name : names) {
    auto cfg = config(name);
    cfg.seeds = {cfg.seeds.front()};
    cfg.schedule.rounds = std::min<long>(cfg.schedule.rounds, name == "s1_fpfc_fixed.json" ? 5 : 60);
    std::vector<std::string> texts;
    for (int run = 0; run < 2; ++run) {
      cfg.out_dir = root / (name + std::to_string(run));
      fs::remove_all(cfg.out_dir);
      fpfc::run_experiment(cfg);
      texts.push_back(fpfc::read_text(cfg.out_dir / ("seed_" + std::to_string(cfg.seeds.front())) / "rounds.csv"));
    }
    identical += texts[0] == texts[1] && !texts[0].empty();
    ++total;
  }
  return {identical == total, std::to_string(identical) + "/" + std::to_string(total) +
                                  " configs gave byte-identical rounds.csv"};
}

// S1 tuned-FPFC results are shared by criteria 8 and 13.
struct SeedOutcome {
  std::size_t num = 0;
  double ari = 0.0;
  double metric = 0.0;
  long rounds = 0;
};

std::vector<SeedOutcome> run_config_seeds(const std::string& name) {
  static std::map<std::string, std::vector<SeedOutcome>> cache;
  if (auto it = cache.find(name); it != cache.end()) return it->second;
  const auto cfg = config(name);
  std::vector<SeedOutcome> out;
  for (std::uint64_t seed : cfg.seeds) {
    const auto fed = fpfc::build_federation(cfg, seed);
    const auto rep = fpfc::run_seed(cfg, fed, seed);
    out.push_back({rep.num_clusters, rep.ari, rep.test_metric, rep.rounds});
    std::cerr << "  " << name << " seed " << seed << ": Num " << rep.num_clusters << ", ARI "
              << rep.ari << ", test " << rep.test_metric << ", lambda " << rep.lambda << "\n";
  }
  cache[name] = out;
  return out;
}

std::string describe(const std::vector<SeedOutcome>& r) {
  std::ostringstream s;
  s << "Num/ARI per seed:";
  for (const auto& o : r) s << " " << o.num << "/" << fmt("%.2f", o.ari);
  return s.str();
}

double mean_of(const std::vector<SeedOutcome>& r, double SeedOutcome::*field) {
  double acc = 0;
  for (const auto& o : r) acc += o.*field;
  return acc / static_cast<double>(r.size());
}

bool perfect(const SeedOutcome& o, std::size_t num) { return o.num == num && o.ari >= 1.0 - 1e-12; }

Verdict c8_s1_fpfc() {
  const auto r = run_config_seeds("s1_fpfc_warmup.json");
  const auto good = std::count_if(r.begin(), r.end(), [](const auto& o) { return perfect(o, 4); });
  const double acc = mean_of(r, &SeedOutcome::metric);
  return {good >= 2 && acc >= 0.86, describe(r) + "; mean test acc " + fmt("%.4f", acc)};
}

Verdict c9_s1_baselines() {
  const double fedavg = mean_of(run_config_seeds("s1_fedavg.json"), &SeedOutcome::metric);
  const double local = mean_of(run_config_seeds("s1_local.json"), &SeedOutcome::metric);
  const bool ok = fedavg >= 0.22 && fedavg <= 0.38 && local >= 0.82 && local <= 0.88;
  return {ok, "FedAvg mean acc " + fmt("%.4f", fedavg) + ", LOCAL mean acc " + fmt("%.4f", local)};
}

Verdict all_seeds_perfect(const std::string& name, std::size_t num) {
  const auto r = run_config_seeds(name);
  const bool ok = std::all_of(r.begin(), r.end(), [&](const auto& o) { return perfect(o, num); });
  return {ok, describe(r) + "; mean test acc " + fmt("%.4f", mean_of(r, &SeedOutcome::metric))};
}

Verdict c13_l1_vs_scad() {
  const double scad = mean_of(run_config_seeds("s1_fpfc_warmup.json"), &SeedOutcome::ari);
  const double l1 = mean_of(run_config_seeds("s1_fpfc_l1_warmup.json"), &SeedOutcome::ari);
  return {scad >= l1, "mean ARI FPFC " + fmt("%.3f", scad) + " vs FPFC-l1 " + fmt("%.3f", l1)};
}

Verdict c14_warmup_efficiency() {
  auto cfg = config("s1_fpfc_warmup.json");
  const std::uint64_t seed = cfg.seeds.front();
  const auto fed = fpfc::build_federation(cfg, seed);
  fpfc::EngineOptions o;
  o.penalty = cfg.penalty();
  o.track_lagrangian = o.track_clusters = false;
  const auto warm = fpfc::tune_warmup(fed, cfg.hp, cfg.ladder, cfg.schedule, o, seed);
  // The grid has no shared budget: each lambda gets the same per-lambda cap.
  const auto grid = fpfc::tune_separate(fed, cfg.hp, cfg.ladder, cfg.schedule, o, seed);
  const double ratio = static_cast<double>(warm.total_rounds) / static_cast<double>(grid.total_rounds);
  return {ratio <= 0.7, "warmup " + std::to_string(warm.total_rounds) + " rounds vs grid " +
                            std::to_string(grid.total_rounds) + " (ratio " + fmt("%.3f", ratio) +
                            ", per-lambda cap " + std::to_string(cfg.ladder.per_lambda_round_cap) + ")"};
}

Verdict c15_async() {
  const auto cfg = config("async_stragglers.json");
  const std::uint64_t seed = cfg.seeds.front();
  const auto fed = fpfc::build_federation(cfg, seed);
  fpfc::EngineOptions o;
  o.track_lagrangian = o.track_clusters = false;
  fpfc::DelayModel delays = fpfc::DelayModel::uniform(fed.m(), cfg.async->delay_max);
  delays.with_stragglers(cfg.async->stragglers, cfg.async->straggler_factor);
  o.delays = delays;

  const auto sync = fpfc::run_fpfc(fed, cfg.hp, cfg.schedule, o, seed);
  const double target = sync.traces.back().train_loss;
  const double sync_time = sync.state.sim_time_s;

  double reached = -1.0;
  o.observer = [&](const fpfc::RoundTrace& t, const fpfc::EngineState&) {
    if (t.train_loss <= target) {
      reached = t.sim_time_s;
      return false;
    }
    return true;
  };
  const long max_events = 50 * cfg.schedule.rounds * static_cast<long>(fed.m());
  fpfc::run_async_fpfc(fed, cfg.hp, max_events, cfg.schedule.epochs, o, seed, sync_time);
  const std::string head = "sync round-" + std::to_string(cfg.schedule.rounds) + " loss " +
                           fmt("%.5f", target) + " at " + fmt("%.1f", sync_time) + " s; ";
  if (reached < 0) return {false, head + "async did not reach it within the sync time"};
  const double ratio = reached / sync_time;
  return {ratio <= 0.8, head + "async reached it at " + fmt("%.1f", reached) + " s (ratio " +
                            fmt("%.3f", ratio) + ")"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
};

std::vector<Criterion> criteria() {
  return {
      {1, "prox matches 1-D numeric oracle", c1_prox_oracle},
      {2, "smoothed SCAD sandwich and Lipschitz bounds", c2_sandwich_lipschitz},
      {3, "gradient finite-difference checks", c3_gradients},
      {4, "inexact local solve bound", c4_inexactness},
      {5, "augmented Lagrangian descent", c5_descent},
      {6, "stationarity decay O(1/K)", c6_stationarity},
      {7, "byte-identical rounds.csv", c7_determinism},
      {8, "S1 tuned FPFC recovers 4 clusters", c8_s1_fpfc},
      {9, "S1 FedAvg and LOCAL accuracy bands", c9_s1_baselines},
      {10, "S4 one cluster", [] { return all_seeds_perfect("s4_fpfc_warmup.json", 1); }},
      {11, "S5 fifty clusters", [] { return all_seeds_perfect("s5_fpfc_warmup.json", 50); }},
      {12, "S3 two clusters", [] { return all_seeds_perfect("s3_fpfc_warmup.json", 2); }},
      {13, "FPFC ARI >= FPFC-l1 ARI on S1", c13_l1_vs_scad},
      {14, "warmup rounds <= 0.7 x grid rounds", c14_warmup_efficiency},
      {15, "async reaches sync loss in <= 0.8 x time", c15_async},
  };
}

std::set<int> parse_selection(const std::vector<std::string>& args) {
  std::set<int> out;
  for (const auto& a : args) {
    const auto dash = a.find('-');
    if (dash == std::string::npos) {
      out.insert(std::stoi(a));
    } else {
      for (int k = std::stoi(a.substr(0, dash)); k <= std::stoi(a.substr(dash + 1)); ++k) out.insert(k);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  std::vector<std::string> picks;
  for (int k = 1; k < argc; ++k) {
    const std::string a = argv[k];
    if (a == "--strict") {
      strict = true;
    } else {
      picks.push_back(a);
    }
  }
  std::set<int> selected;
  try {
    selected = parse_selection(picks);
  } catch (const std::exception&) {
    std::cerr << "usage: fpfc_acceptance [--strict] [N | N-M]...\n";
    return 2;
  }

  int failed = 0;
  bool crashed = false;
  for (const auto& c : criteria()) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
      crashed = true;
    }
    failed += !v.pass;
    char head[96];
    std::snprintf(head, sizeof head, "criterion %2d %s  ", c.id, v.pass ? "PASS" : "FAIL");
    std::cout << head << c.name << ": " << v.detail << " [" << fmt("%.1f", seconds_since(t0)) << " s]"
              << std::endl;
  }
  if (crashed) return 2;
  return strict && failed > 0 ? 1 : 0;
}
