#include "fpfc/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fpfc {

using nlohmann::json;

Algorithm parse_algorithm(const std::string& name) {
  if (name == "fpfc") return Algorithm::Fpfc;
  if (name == "fpfc-l1") return Algorithm::FpfcL1;
  if (name == "async-fpfc") return Algorithm::AsyncFpfc;
  if (name == "fedavg") return Algorithm::FedAvg;
  if (name == "local") return Algorithm::Local;
  throw ConfigError("algorithm: unknown value '" + name +
                    "' (expected fpfc, fpfc-l1, async-fpfc, fedavg or local)");
}

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Fpfc: return "fpfc";
    case Algorithm::FpfcL1: return "fpfc-l1";
    case Algorithm::AsyncFpfc: return "async-fpfc";
    case Algorithm::FedAvg: return "fedavg";
    case Algorithm::Local: return "local";
  }
  return "?";
}

TuningMode parse_tuning_mode(const std::string& name) {
  if (name == "fixed") return TuningMode::Fixed;
  if (name == "warmup") return TuningMode::Warmup;
  if (name == "grid") return TuningMode::Grid;
  throw ConfigError("tuning.mode: unknown value '" + name + "' (expected fixed, warmup or grid)");
}

const char* to_string(TuningMode t) {
  switch (t) {
    case TuningMode::Fixed: return "fixed";
    case TuningMode::Warmup: return "warmup";
    case TuningMode::Grid: return "grid";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

/// Typed read of an optional key with the field path in every error.
class Block {
 public:
  Block(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const char* key) const { return node_.contains(key); }
  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  T get(const char* key, T fallback) const {
    if (!has(key)) return fallback;
    return read<T>(node_.at(key), field(key));
  }

  template <class T>
  T require(const char* key) const {
    if (!has(key)) throw ConfigError(field(key) + ": required field is missing");
    return read<T>(node_.at(key), field(key));
  }

  const json& raw(const char* key) const { return node_.at(key); }
  Block child(const char* key) const { return Block(node_.at(key), field(key)); }

  void reject_unknown(std::initializer_list<const char*> known) const {
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& item : node_.items()) {
      if (!allowed.count(item.key())) {
        throw ConfigError(field(item.key().c_str()) + ": unknown field");
      }
    }
  }

  template <class T>
  static T read(const json& v, const std::string& where) {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(where + ": expected a number");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
        if (std::is_unsigned_v<T> && v.get<long long>() < 0 && !v.is_number_unsigned()) {
          throw ConfigError(where + ": must be >= 0");
        }
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(where + ": expected true or false");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(where + ": expected a string");
      }
      return v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }

  template <class T>
  std::vector<T> list(const char* key) const {
    const json& v = node_.at(key);
    if (!v.is_array()) throw ConfigError(field(key) + ": expected a list");
    std::vector<T> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
      out.push_back(read<T>(v[k], field(key) + "[" + std::to_string(k) + "]"));
    }
    return out;
  }

 private:
  const json& node_;
  std::string path_;
};

SplitFractions parse_fractions(const Block& b) {
  SplitFractions f;
  if (!b.has("fractions")) return f;
  const Block fb = b.child("fractions");
  fb.reject_unknown({"train", "validation", "test"});
  f.train = fb.get("train", f.train);
  f.validation = fb.get("validation", f.validation);
  f.test = fb.get("test", f.test);
  return f;
}

DatasetSource parse_dataset(const Block& b, const std::filesystem::path& base,
                            std::optional<std::uint64_t>& data_seed) {
  const std::string kind = b.require<std::string>("kind");
  if (b.has("seed")) data_seed = b.get<std::uint64_t>("seed", 0);

  if (kind == "synthetic") {
    b.reject_unknown({"kind", "seed", "scenario", "cluster_sizes", "p", "classes",
                      "label_noise_sd", "min_samples", "max_samples", "size_skew", "fractions"});
    SyntheticSource src;
    if (b.has("scenario")) {
      src.scenario = b.get<std::string>("scenario", "");
      try {
        src.options = scenario_options(parse_scenario(src.scenario));
      } catch (const InvalidArgument& e) {
        throw ConfigError(b.field("scenario") + ": " + e.what());
      }
    } else if (!b.has("cluster_sizes")) {
      throw ConfigError(b.field("scenario") + ": give a scenario or cluster_sizes");
    }
    auto& o = src.options;
    if (b.has("cluster_sizes")) o.cluster_sizes = b.list<std::size_t>("cluster_sizes");
    o.p = b.get("p", o.p);
    o.classes = b.get("classes", o.classes);
    o.label_noise_sd = b.get("label_noise_sd", o.label_noise_sd);
    o.min_samples = b.get("min_samples", o.min_samples);
    o.max_samples = b.get("max_samples", o.max_samples);
    o.size_skew = b.get("size_skew", o.size_skew);
    o.fractions = parse_fractions(b);
    if (o.cluster_sizes.empty()) throw ConfigError(b.field("cluster_sizes") + ": must not be empty");
    if (o.min_samples < 1 || o.max_samples < o.min_samples) {
      throw ConfigError(b.field("max_samples") + ": need 1 <= min_samples <= max_samples");
    }
    if (o.classes < 2) throw ConfigError(b.field("classes") + ": must be >= 2");
    if (o.p < 1) throw ConfigError(b.field("p") + ": must be >= 1");
    return src;
  }
  if (kind == "linear") {
    b.reject_unknown({"kind", "seed", "m", "clusters", "n_per_device", "d", "gap", "noise",
                      "intercept", "fractions"});
    LinearClusterOptions o;
    o.m = b.get("m", o.m);
    o.clusters = b.get("clusters", o.clusters);
    o.n_per_device = b.get("n_per_device", o.n_per_device);
    o.d = b.get("d", o.d);
    o.gap = b.get("gap", o.gap);
    o.noise = b.get("noise", o.noise);
    o.intercept = b.get("intercept", o.intercept);
    o.fractions = parse_fractions(b);
    if (!(o.gap > 0.0)) throw ConfigError(b.field("gap") + ": must be > 0");
    if (o.clusters < 1 || o.clusters > o.m) {
      throw ConfigError(b.field("clusters") + ": need 1 <= clusters <= m");
    }
    return o;
  }
  if (kind == "csv") {
    b.reject_unknown({"kind", "seed", "files", "response", "pad_features_to", "standardize",
                      "fractions"});
    CsvPlan plan;
    plan.response = b.require<std::string>("response");
    plan.pad_features_to = b.get("pad_features_to", plan.pad_features_to);
    plan.standardize = b.get("standardize", plan.standardize);
    plan.fractions = parse_fractions(b);
    if (!b.has("files") || !b.raw("files").is_array() || b.raw("files").empty()) {
      throw ConfigError(b.field("files") + ": expected a non-empty list");
    }
    for (std::size_t k = 0; k < b.raw("files").size(); ++k) {
      const Block fb(b.raw("files")[k], b.field("files") + "[" + std::to_string(k) + "]");
      fb.reject_unknown({"path", "devices"});
      std::filesystem::path p = fb.require<std::string>("path");
      if (p.is_relative()) p = base / p;
      const auto devices = fb.get<std::size_t>("devices", 1);
      if (devices < 1) throw ConfigError(fb.field("devices") + ": must be >= 1");
      plan.sources.push_back({p, devices});
    }
    return plan;
  }
  if (kind == "bundle") {
    b.reject_unknown({"kind", "seed", "path"});
    std::filesystem::path p = b.require<std::string>("path");
    if (p.is_relative()) p = base / p;
    return BundleSource{p};
  }
  throw ConfigError(b.field("kind") + ": unknown dataset kind '" + kind +
                    "' (expected synthetic, linear, csv or bundle)");
}

EpochRule parse_epochs(const Block& b) {
  if (!b.has("local_epochs")) return EpochRule::fixed(10);
  const json& v = b.raw("local_epochs");
  const std::string where = b.field("local_epochs");
  if (v.is_number_integer()) {
    const auto t = Block::read<long>(v, where);
    if (t < 1) throw ConfigError(where + ": must be >= 1");
    return EpochRule::fixed(static_cast<std::size_t>(t));
  }
  if (v.is_array()) return EpochRule::listed(b.list<std::size_t>("local_epochs"));
  if (v.is_object()) {
    const Block eb(v, where);
    eb.reject_unknown({"growing", "c"});
    const std::string rule = eb.require<std::string>("growing");
    if (rule == "ceil") {
      const double c = eb.get("c", 1.0);
      if (!(c > 0.0)) throw ConfigError(eb.field("c") + ": must be > 0");
      return EpochRule::growing_ceil(c);
    }
    if (rule == "linear") return EpochRule::growing_linear();
    throw ConfigError(eb.field("growing") + ": expected 'ceil' or 'linear'");
  }
  throw ConfigError(where + ": expected an integer, a list, or {\"growing\": ...}");
}

Participation parse_participation(const Block& b) {
  if (!b.has("participation")) return Participation::full();
  const json& v = b.raw("participation");
  const std::string where = b.field("participation");
  if (v.is_string()) {
    if (v.get<std::string>() == "full") return Participation::full();
    throw ConfigError(where + ": expected \"full\" or {\"tau\": value}");
  }
  const Block pb(v, where);
  pb.reject_unknown({"tau"});
  const double tau = pb.require<double>("tau");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError(pb.field("tau") + ": must lie in (0, 1]");
  return Participation::uniform(tau);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  const Block b(root, "");
  b.reject_unknown({"dataset", "algorithm", "hyperparams", "tuning", "schedule", "async",
                    "output", "seeds", "model"});

  ExperimentConfig cfg;
  if (!b.has("dataset")) throw ConfigError("dataset: required block is missing");
  cfg.dataset = parse_dataset(b.child("dataset"), base_dir, cfg.data_seed);
  cfg.algorithm = parse_algorithm(b.get<std::string>("algorithm", "fpfc"));

  if (b.has("model")) {
    const Block mb = b.child("model");
    mb.reject_unknown({"kind"});
    const std::string kind = mb.require<std::string>("kind");
    const bool regression = std::holds_alternative<LinearClusterOptions>(cfg.dataset) ||
                            std::holds_alternative<CsvPlan>(cfg.dataset);
    if (kind != "softmax" && kind != "linear") {
      throw ConfigError(mb.field("kind") + ": expected 'softmax' or 'linear'");
    }
    if (!std::holds_alternative<BundleSource>(cfg.dataset) && (kind == "linear") != regression) {
      throw ConfigError(mb.field("kind") + ": does not match the dataset's model");
    }
  }

  if (b.has("hyperparams")) {
    const Block hb = b.child("hyperparams");
    hb.reject_unknown({"lambda", "a", "xi", "rho", "alpha", "nu"});
    cfg.hp.lambda = hb.get("lambda", cfg.hp.lambda);
    cfg.hp.a = hb.get("a", cfg.hp.a);
    cfg.hp.xi = hb.get("xi", cfg.hp.xi);
    cfg.hp.rho = hb.get("rho", cfg.hp.rho);
    cfg.hp.alpha = hb.get("alpha", cfg.hp.alpha);
    cfg.hp.nu = hb.get("nu", cfg.hp.nu);
  }

  if (b.has("tuning")) {
    const Block tb = b.child("tuning");
    tb.reject_unknown({"mode", "ladder", "advance_tol", "round_cap", "min_rounds"});
    cfg.tuning = parse_tuning_mode(tb.get<std::string>("mode", "fixed"));
    if (tb.has("ladder")) cfg.ladder.values = tb.list<double>("ladder");
    cfg.ladder.advance_tol = tb.get("advance_tol", cfg.ladder.advance_tol);
    cfg.ladder.per_lambda_round_cap = tb.get("round_cap", cfg.ladder.per_lambda_round_cap);
    cfg.ladder.min_rounds = tb.get("min_rounds", cfg.ladder.min_rounds);
  }

  if (b.has("schedule")) {
    const Block sb = b.child("schedule");
    sb.reject_unknown({"rounds", "local_epochs", "participation", "batch_size", "threads"});
    cfg.schedule.rounds = sb.get("rounds", cfg.schedule.rounds);
    cfg.schedule.epochs = parse_epochs(sb);
    cfg.schedule.participation = parse_participation(sb);
    cfg.batch_size = sb.get("batch_size", cfg.batch_size);
    cfg.threads = sb.get("threads", cfg.threads);
  } else {
    cfg.schedule.epochs = EpochRule::fixed(10);
  }

  if (b.has("async")) {
    const Block ab = b.child("async");
    ab.reject_unknown({"delay_max", "stragglers", "straggler_factor", "time_limit_s"});
    AsyncSettings a;
    a.delay_max = ab.get("delay_max", a.delay_max);
    if (ab.has("stragglers")) a.stragglers = ab.list<std::size_t>("stragglers");
    a.straggler_factor = ab.get("straggler_factor", a.straggler_factor);
    a.time_limit_s = ab.get("time_limit_s", a.time_limit_s);
    cfg.async = a;
  }

  if (b.has("output")) {
    const Block ob = b.child("output");
    ob.reject_unknown({"dir", "snapshots", "wall_clock"});
    if (ob.has("dir")) {
      std::filesystem::path p = ob.get<std::string>("dir", "");
      cfg.out_dir = p.is_relative() ? base_dir / p : p;
      cfg.out_dir_from_config = true;
    }
    if (ob.has("snapshots")) cfg.snapshots = ob.list<long>("snapshots");
    cfg.wall_clock = ob.get("wall_clock", cfg.wall_clock);
  }

  if (b.has("seeds")) cfg.seeds = b.list<std::uint64_t>("seeds");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const DataError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config(text, path.parent_path());
}

void ExperimentConfig::validate() const {
  const bool tuned = tuning != TuningMode::Fixed;
  const bool fusion = algorithm == Algorithm::Fpfc || algorithm == Algorithm::FpfcL1 ||
                      algorithm == Algorithm::AsyncFpfc;
  try {
    if (fusion || algorithm == Algorithm::Local || algorithm == Algorithm::FedAvg) {
      HyperParams probe = hp;
      if (!fusion) {
        probe.lambda = 0.0;
        probe.rho = 0.0;
      }
      probe.validate(penalty());
      if (tuned) {
        for (double lambda : ladder.values) {
          probe.lambda = lambda;
          probe.validate(penalty());
        }
      }
    }
  } catch (const InvalidHyperParameter& e) {
    throw ConfigError(e.what());
  }
  if (schedule.rounds < 0) throw ConfigError("schedule.rounds: must be >= 0");
  if (seeds.empty()) throw ConfigError("seeds: list must not be empty");
  if (tuned) {
    if (ladder.values.empty()) {
      throw ConfigError("tuning.ladder: required when tuning.mode is " +
                        std::string(to_string(tuning)));
    }
    if (algorithm != Algorithm::Fpfc && algorithm != Algorithm::FpfcL1) {
      throw ConfigError("tuning.mode: lambda tuning applies to fpfc and fpfc-l1 only");
    }
    try {
      ladder.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }
  if (algorithm == Algorithm::AsyncFpfc && !async) {
    throw ConfigError("async: required block for algorithm async-fpfc");
  }
  if (async) {
    if (!(async->delay_max >= 0.0)) throw ConfigError("async.delay_max: must be >= 0");
    if (!(async->straggler_factor > 0.0)) throw ConfigError("async.straggler_factor: must be > 0");
  }
  if (schedule.participation.kind == Participation::Kind::Uniform &&
      !(schedule.participation.tau > 0.0 && schedule.participation.tau <= 1.0)) {
    throw ConfigError("schedule.participation.tau: must lie in (0, 1]");
  }
  if (threads < 1) throw ConfigError("schedule.threads: must be >= 1");
}

Federation build_federation(const ExperimentConfig& config, std::uint64_t seed) {
  const std::uint64_t s = config.data_seed.value_or(seed);
  return std::visit(
      [&](const auto& src) -> Federation {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, SyntheticSource>) return gen_synthetic(src.options, s);
        if constexpr (std::is_same_v<T, LinearClusterOptions>) return gen_linear_clusters(src, s);
        if constexpr (std::is_same_v<T, CsvPlan>) return load_csv_federation(src, s);
        if constexpr (std::is_same_v<T, BundleSource>) return read_federation(src.dir);
      },
      config.dataset);
}

// ---------------------------------------------------------------------------
// Running

namespace {

EngineOptions engine_options(const ExperimentConfig& cfg, std::size_t m) {
  EngineOptions o;
  o.penalty = cfg.penalty();
  o.batch_size = cfg.batch_size;
  o.threads = cfg.threads;
  o.wall_clock = cfg.wall_clock;
  if (cfg.async) {
    DelayModel dm = DelayModel::uniform(m, cfg.async->delay_max);
    try {
      dm.with_stragglers(cfg.async->stragglers, cfg.async->straggler_factor);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("async.stragglers: ") + e.what());
    }
    o.delays = dm;
  }
  return o;
}

}  // namespace

namespace {

void run_seed_into(const ExperimentConfig& cfg, const Federation& fed, std::uint64_t seed,
                   SeedReport& rep) {
  rep.seed = seed;
  const std::set<long> snap(cfg.snapshots.begin(), cfg.snapshots.end());
  EngineOptions opts = engine_options(cfg, fed.m());

  auto record_snapshot = [&](long round, const ModelParams& omega) {
    if (snap.count(round)) rep.distance_snapshots.emplace_back(round, pairwise_distances(omega));
  };
  opts.observer = [&](const RoundTrace& t, const EngineState& s) {
    rep.traces.push_back(t);
    record_snapshot(t.round, s.omega);
    return true;
  };

  const auto sizes = fed.sample_sizes(Split::Train);
  ModelParams final_omega;
  long final_round = 0;
  auto finish_fusion = [&](const EngineState& state, double lambda) {
    rep.lambda = lambda;
    rep.clusters = extract_clusters(state.pairwise, sizes, state.omega, cfg.hp.nu);
    final_omega = state.omega;
    final_round = state.round;
  };
  auto finish_plain = [&](const ModelParams& omega) {
    rep.lambda = 0.0;
    rep.clusters = assign_clusters(cluster_labels(pairwise_distances(omega), cfg.hp.nu), sizes,
                                   omega);
    final_omega = omega;
    final_round = rep.traces.empty() ? 0 : rep.traces.back().round;
  };

  const EpochRule& epochs = cfg.schedule.epochs;
  record_snapshot(0, init_state(fed, 0.0, seed, opts.init_scale).omega);
  switch (cfg.algorithm) {
    case Algorithm::Fpfc:
    case Algorithm::FpfcL1: {
      if (cfg.tuning == TuningMode::Fixed) {
        finish_fusion(run_fpfc(fed, cfg.hp, cfg.schedule, opts, seed).state, cfg.hp.lambda);
      } else {
        const TuningResult t =
            cfg.tuning == TuningMode::Warmup
                ? tune_warmup(fed, cfg.hp, cfg.ladder, cfg.schedule, opts, seed)
                : tune_separate(fed, cfg.hp, cfg.ladder, cfg.schedule, opts, seed);
        finish_fusion(t.best_state, t.selected_lambda);
        rep.tuning_json = to_json(t);
      }
      break;
    }
    case Algorithm::AsyncFpfc: {
      const RunResult r = run_async_fpfc(fed, cfg.hp, cfg.schedule.rounds, epochs, opts, seed,
                                         cfg.async->time_limit_s);
      finish_fusion(r.state, cfg.hp.lambda);
      break;
    }
    case Algorithm::Local:
    case Algorithm::FedAvg: {
      if (epochs.kind != EpochRule::Kind::Constant) {
        throw ConfigError("schedule.local_epochs: baselines take a constant epoch count");
      }
      const std::size_t t = epochs.constant;
      const BaselineResult b =
          cfg.algorithm == Algorithm::Local
              ? run_local_baseline(fed, cfg.schedule.rounds, t, cfg.hp.alpha, seed, opts.init_scale)
              : run_fedavg(fed, cfg.schedule.rounds, t, cfg.hp.alpha, cfg.schedule.participation,
                           seed, opts.init_scale);
      rep.traces = b.traces;
      finish_plain(b.omega);
      break;
    }
  }

  rep.test_metric = evaluate(fed, final_omega).test_metric;
  rep.num_clusters = rep.clusters.count;
  if (fed.has_truth() && fed.m() >= 2) {
    rep.ari = adjusted_rand_index(rep.clusters.labels, fed.true_labels);
  }
  rep.rounds = static_cast<long>(rep.traces.size());
  bool have_final = false;
  for (const auto& [round, mat] : rep.distance_snapshots) have_final |= round == final_round;
  if (!have_final) rep.distance_snapshots.emplace_back(final_round, pairwise_distances(final_omega));
}

}  // namespace

SeedReport run_seed(const ExperimentConfig& cfg, const Federation& fed, std::uint64_t seed) {
  SeedReport rep;
  run_seed_into(cfg, fed, seed, rep);
  return rep;
}

RunReport run_experiment(const ExperimentConfig& cfg, bool quiet) {
  RunReport report;
  std::vector<SummaryRow> rows;
  std::filesystem::create_directories(cfg.out_dir);
  for (std::uint64_t seed : cfg.seeds) {
    const auto dir = cfg.out_dir / ("seed_" + std::to_string(seed));
    std::filesystem::create_directories(dir);
    const Federation fed = build_federation(cfg, seed);
    SeedReport rep;
    try {
      run_seed_into(cfg, fed, seed, rep);
    } catch (const DivergenceError& e) {
      write_rounds_csv(rep.traces, dir / "rounds.csv");
      write_text(dir / "status.json",
                 json{{"status", "diverged"}, {"partial", true}, {"message", e.what()}}.dump(2) +
                     "\n");
      throw;
    }
    write_rounds_csv(rep.traces, dir / "rounds.csv");
    write_text(dir / "clusters.json", to_json(rep.clusters) + "\n");
    for (const auto& [round, mat] : rep.distance_snapshots) {
      write_matrix_csv(mat, dir / ("distances_" + std::to_string(round) + ".csv"));
    }
    if (!rep.tuning_json.empty()) write_text(dir / "tuning.json", rep.tuning_json + "\n");
    write_text(dir / "status.json", json{{"status", "ok"}, {"partial", false}}.dump(2) + "\n");
    rows.push_back(SummaryRow{std::to_string(seed), rep.test_metric,
                              static_cast<double>(rep.num_clusters), rep.ari, rep.lambda,
                              static_cast<double>(rep.rounds)});
    if (!quiet) {
      std::cerr << "seed " << seed << ": test metric " << rep.test_metric << ", clusters "
                << rep.num_clusters << ", ARI " << rep.ari << "\n";
    }
    report.seeds.push_back(std::move(rep));
  }
  report.summary = summarize(rows);
  write_summary_csv(report.summary, cfg.out_dir / "summary.csv");
  return report;
}

std::string format_summary_table(const ExperimentConfig& cfg, const RunReport& report) {
  const std::size_t n = report.seeds.size();
  if (report.summary.size() < n + 2) return "";
  const SummaryRow& mean = report.summary[n];
  const SummaryRow& sd = report.summary[n + 1];
  char buf[256];
  std::ostringstream out;
  std::snprintf(buf, sizeof buf, "%-12s %-20s %-16s %-16s %-10s\n", "algorithm", "metric", "clusters",
                "ARI", "lambda");
  out << buf;
  std::snprintf(buf, sizeof buf, "%-12s %8.4f +- %-8.4f %6.2f +- %-6.2f %6.2f +- %-6.2f %-10.4g\n",
                to_string(cfg.algorithm), mean.metric, sd.metric, mean.num_clusters,
                sd.num_clusters, mean.ari, sd.ari, mean.lambda);
  out << buf;
  return out.str();
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidHyperParameter*>(&e)) {
    return 2;
  }
  if (dynamic_cast<const DataError*>(&e)) return 3;
  if (dynamic_cast<const DivergenceError*>(&e)) return 4;
  if (dynamic_cast<const InvalidArgument*>(&e)) return 2;
  return 1;
}

}  // namespace fpfc
