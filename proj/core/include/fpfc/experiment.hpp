#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fpfc/clustering.hpp"
#include "fpfc/data.hpp"
#include "fpfc/engine.hpp"
#include "fpfc/report_io.hpp"
#include "fpfc/tuning.hpp"

namespace fpfc {

/// Invalid or inconsistent experiment configuration; the message starts with
/// the offending field path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class Algorithm { Fpfc, FpfcL1, AsyncFpfc, FedAvg, Local };
enum class TuningMode { Fixed, Warmup, Grid };

Algorithm parse_algorithm(const std::string& name);
const char* to_string(Algorithm a);
TuningMode parse_tuning_mode(const std::string& name);
const char* to_string(TuningMode t);

struct SyntheticSource {
  SyntheticOptions options;
  std::string scenario;  // empty for custom cluster sizes
};
struct BundleSource {
  std::filesystem::path dir;
};
using DatasetSource = std::variant<SyntheticSource, LinearClusterOptions, CsvPlan, BundleSource>;

struct AsyncSettings {
  double delay_max = 20.0;
  IndexList stragglers;
  double straggler_factor = 10.0;
  double time_limit_s = 0.0;
};

struct ExperimentConfig {
  DatasetSource dataset;
  /// Seed for data generation; when unset each run seed generates its own federation.
  std::optional<std::uint64_t> data_seed;
  Algorithm algorithm = Algorithm::Fpfc;
  HyperParams hp;
  TuningMode tuning = TuningMode::Fixed;
  LambdaLadder ladder;
  Schedule schedule;
  std::size_t batch_size = 0;
  unsigned threads = 1;
  std::optional<AsyncSettings> async;
  std::filesystem::path out_dir = "fpfc_out";
  bool out_dir_from_config = false;
  std::vector<long> snapshots{0, 5, 50};  // the final round is always added
  bool wall_clock = false;
  std::vector<std::uint64_t> seeds{1};

  PenaltyKind penalty() const {
    return algorithm == Algorithm::FpfcL1 ? PenaltyKind::GroupL1 : PenaltyKind::SmoothedSCAD;
  }
  /// Throws ConfigError naming the field.
  void validate() const;
};

/// Parses the JSON configuration; relative paths resolve against base_dir.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

Federation build_federation(const ExperimentConfig& config, std::uint64_t seed);

struct SeedReport {
  std::uint64_t seed = 0;
  double lambda = 0.0;
  double test_metric = 0.0;
  std::size_t num_clusters = 0;
  double ari = 0.0;
  long rounds = 0;
  std::vector<RoundTrace> traces;
  ClusterAssignment clusters;
  std::vector<std::pair<long, Matrix>> distance_snapshots;
  std::string tuning_json;  // empty unless lambda was tuned
};

struct RunReport {
  std::vector<SeedReport> seeds;
  std::vector<SummaryRow> summary;  // per seed, then mean and std
};

/// Runs one seed in memory without writing files.
SeedReport run_seed(const ExperimentConfig& config, const Federation& fed, std::uint64_t seed);

/// Runs every seed and writes <out>/seed_<s>/{rounds.csv, clusters.json,
/// distances_<k>.csv[, tuning.json]} plus <out>/summary.csv. A divergence
/// still writes the rounds completed so far and a status.json, then rethrows.
RunReport run_experiment(const ExperimentConfig& config, bool quiet = true);

std::string format_summary_table(const ExperimentConfig& config, const RunReport& report);

/// 0 success, 2 configuration, 3 data, 4 divergence, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace fpfc
