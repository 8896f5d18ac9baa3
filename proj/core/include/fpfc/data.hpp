#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fpfc/losses.hpp"
#include "fpfc/types.hpp"

namespace fpfc {

struct Federation {
  std::vector<DeviceData> devices;
  std::vector<int> true_labels;     // ground-truth cluster per device; empty when unknown
  std::vector<Vector> true_params;  // per-cluster parameters (synthetic only)
  ModelSpec spec;

  std::size_t m() const noexcept { return devices.size(); }
  bool has_truth() const noexcept { return !true_labels.empty(); }
  /// Per-device row counts of one split.
  std::vector<double> sample_sizes(Split s = Split::Train) const;
  void validate() const;
};

struct SplitFractions {
  double train = 0.64;
  double validation = 0.16;
  double test = 0.20;
};

/// Seeded shuffle then contiguous train/validation/test slices. Validation
/// and test sizes are round(f * n); train takes the remainder. Throws
/// InvalidArgument when any slice would be empty.
DeviceData split(DeviceData device, const SplitFractions& fractions, std::uint64_t seed);

enum class Scenario { S1, S2, S3, S4, S5 };

Scenario parse_scenario(const std::string& name);
const char* to_string(Scenario s);

struct SyntheticOptions {
  std::vector<std::size_t> cluster_sizes;  // devices per cluster, contiguous ids
  std::size_t p = 60;
  std::size_t classes = 10;
  double label_noise_sd = 0.5;
  std::size_t min_samples = 250;
  std::size_t max_samples = 25810;
  double size_skew = 3.0;  // n = round(min * (max/min)^(u^skew))
  SplitFractions fractions;
};

SyntheticOptions scenario_options(Scenario s);

/// Softmax-classification federation: per cluster W (classes x p) and b with
/// entries N(mu_l, 1), mu_l ~ N(0, 1); x ~ N(0, I); y = argmax(Wx + b + tau)
/// with tau ~ N(0, sd^2 I).
Federation gen_synthetic(const SyntheticOptions& options, std::uint64_t seed);
Federation gen_synthetic(Scenario scenario, std::uint64_t seed);

/// Power-law sample sizes used by the synthetic generator.
std::vector<std::size_t> power_law_sizes(std::size_t m, std::size_t min_n, std::size_t max_n,
                                         double skew, std::uint64_t seed);

struct LinearClusterOptions {
  std::size_t m = 8;
  std::size_t clusters = 2;
  std::size_t n_per_device = 100;
  std::size_t d = 5;
  double gap = 2.0;    // minimum distance between cluster parameters
  double noise = 0.1;  // response noise sd
  bool intercept = false;
  SplitFractions fractions;
};

/// y = <x, alpha_l> (+ alpha_l[intercept]) + N(0, noise^2); cluster parameters
/// are rejection-resampled until pairwise separated by at least `gap`.
Federation gen_linear_clusters(const LinearClusterOptions& options, std::uint64_t seed);

struct CsvSource {
  std::filesystem::path path;
  std::size_t devices = 1;
};

struct CsvPlan {
  std::vector<CsvSource> sources;
  std::string response;
  std::size_t pad_features_to = 0;  // append seeded N(0,1) columns up to this width
  SplitFractions fractions;
  bool standardize = true;
};

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;  // rows x columns
};

/// Comma-separated numeric table with a header row.
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text, const std::string& origin = "<memory>");

/// Rows of each source are shuffled then dealt round-robin to that source's
/// devices; features are standardised per device with training statistics.
/// Devices from source s carry true label s.
Federation load_csv_federation(const CsvPlan& plan, std::uint64_t seed);

/// Structured text bundle: manifest.json plus one CSV per device.
void write_federation(const Federation& fed, const std::filesystem::path& dir);
Federation read_federation(const std::filesystem::path& dir);

}  // namespace fpfc
