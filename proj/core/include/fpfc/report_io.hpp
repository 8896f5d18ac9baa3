#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fpfc/types.hpp"

namespace fpfc {

/// Column order of rounds.csv.
inline constexpr const char* kRoundColumns[] = {
    "round",     "lambda",      "active_count",   "train_loss", "val_metric", "test_metric",
    "aug_lagrangian", "num_clusters", "ari", "sim_time_s", "wall_ms"};

/// One row of rounds.csv (the active set is stored only as its size).
struct RoundRow {
  long round = 0;
  double lambda = 0.0;
  std::size_t active_count = 0;
  double train_loss = 0.0;
  double val_metric = 0.0;
  double test_metric = 0.0;
  double aug_lagrangian = 0.0;
  std::size_t num_clusters = 0;
  double ari = 0.0;
  double sim_time_s = 0.0;
  double wall_ms = 0.0;
};

RoundRow to_row(const RoundTrace& t);

std::string format_rounds_csv(const std::vector<RoundTrace>& traces);
void write_rounds_csv(const std::vector<RoundTrace>& traces, const std::filesystem::path& path);
std::vector<RoundRow> parse_rounds_csv(const std::string& text);
std::vector<RoundRow> read_rounds_csv(const std::filesystem::path& path);

/// Square matrix with a header row "d0,d1,...".
void write_matrix_csv(const Matrix& m, const std::filesystem::path& path);
Matrix read_matrix_csv(const std::filesystem::path& path);

struct SummaryRow {
  std::string label;  // seed number, "mean" or "std"
  double metric = 0.0;
  double num_clusters = 0.0;
  double ari = 0.0;
  double lambda = 0.0;
  double rounds = 0.0;
};

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

/// Per-seed rows followed by "mean" and "std" rows (population std; 0 for one seed).
std::vector<SummaryRow> summarize(const std::vector<SummaryRow>& per_seed);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace fpfc
