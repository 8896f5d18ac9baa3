#include "fpfc/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fpfc/data.hpp"

namespace fpfc {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t column(const CsvTable& t, const std::string& name, const std::string& origin) {
  for (std::size_t k = 0; k < t.header.size(); ++k)
    if (t.header[k] == name) return k;
  throw SchemaError(origin + ": missing column '" + name + "'");
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

RoundRow to_row(const RoundTrace& t) {
  return RoundRow{t.round,         t.lambda_current, t.active_set.size(), t.train_loss,
                  t.val_metric,    t.test_metric,    t.aug_lagrangian,    t.num_clusters,
                  t.ari,           t.sim_time_s,     t.wall_ms};
}

std::string format_rounds_csv(const std::vector<RoundTrace>& traces) {
  std::string out;
  for (std::size_t k = 0; k < std::size(kRoundColumns); ++k) {
    if (k) out += ',';
    out += kRoundColumns[k];
  }
  out += '\n';
  for (const auto& t : traces) {
    const RoundRow r = to_row(t);
    out += std::to_string(r.round) + ',' + num(r.lambda) + ',' + std::to_string(r.active_count) +
           ',' + num(r.train_loss) + ',' + num(r.val_metric) + ',' + num(r.test_metric) + ',' +
           num(r.aug_lagrangian) + ',' + std::to_string(r.num_clusters) + ',' + num(r.ari) + ',' +
           num(r.sim_time_s) + ',' + num(r.wall_ms) + '\n';
  }
  return out;
}

void write_rounds_csv(const std::vector<RoundTrace>& traces, const std::filesystem::path& path) {
  write_text(path, format_rounds_csv(traces));
}

std::vector<RoundRow> parse_rounds_csv(const std::string& text) {
  const CsvTable t = parse_csv(text, "rounds.csv");
  if (t.header.size() != std::size(kRoundColumns)) {
    throw SchemaError("rounds.csv: expected " + std::to_string(std::size(kRoundColumns)) +
                      " columns");
  }
  for (std::size_t k = 0; k < t.header.size(); ++k) {
    if (t.header[k] != kRoundColumns[k]) {
      throw SchemaError("rounds.csv: column " + std::to_string(k) + " is '" + t.header[k] +
                        "', expected '" + kRoundColumns[k] + "'");
    }
  }
  std::vector<RoundRow> rows;
  for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
    auto v = [&](int k) { return t.values(r, k); };
    rows.push_back(RoundRow{static_cast<long>(v(0)), v(1), static_cast<std::size_t>(v(2)), v(3),
                            v(4), v(5), v(6), static_cast<std::size_t>(v(7)), v(8), v(9), v(10)});
  }
  return rows;
}

std::vector<RoundRow> read_rounds_csv(const std::filesystem::path& path) {
  return parse_rounds_csv(read_text(path));
}

void write_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
  std::string out;
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    if (k) out += ',';
    out += "d" + std::to_string(k);
  }
  out += '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      if (k) out += ',';
      out += num(m(r, k));
    }
    out += '\n';
  }
  write_text(path, out);
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  return read_csv(path).values;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path) {
  std::string out = "label,metric,num_clusters,ari,lambda,rounds\n";
  for (const auto& r : rows) {
    out += r.label + ',' + num(r.metric) + ',' + num(r.num_clusters) + ',' + num(r.ari) + ',' +
           num(r.lambda) + ',' + num(r.rounds) + '\n';
  }
  write_text(path, out);
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
  // The label column is text, so parse it off before the numeric fields.
  std::istringstream in(read_text(path));
  std::string line;
  std::vector<SummaryRow> rows;
  if (!std::getline(in, line) || line.rfind("label,", 0) != 0) {
    throw SchemaError(path.string() + ": missing summary header");
  }
  const std::string numeric_header = line.substr(6);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(path.string() + ": short row", line_no, 1);
    const CsvTable t = parse_csv(numeric_header + "\n" + line.substr(comma + 1), path.string());
    const auto v = [&](const char* name) { return t.values(0, static_cast<Eigen::Index>(
                                                                  column(t, name, path.string()))); };
    rows.push_back(SummaryRow{line.substr(0, comma), v("metric"), v("num_clusters"), v("ari"),
                              v("lambda"), v("rounds")});
  }
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<SummaryRow>& per_seed) {
  std::vector<SummaryRow> out = per_seed;
  if (per_seed.empty()) return out;
  const auto n = static_cast<double>(per_seed.size());
  SummaryRow mean{"mean"};
  for (const auto& r : per_seed) {
    mean.metric += r.metric / n;
    mean.num_clusters += r.num_clusters / n;
    mean.ari += r.ari / n;
    mean.lambda += r.lambda / n;
    mean.rounds += r.rounds / n;
  }
  SummaryRow sd{"std"};
  for (const auto& r : per_seed) {
    sd.metric += (r.metric - mean.metric) * (r.metric - mean.metric) / n;
    sd.num_clusters += (r.num_clusters - mean.num_clusters) * (r.num_clusters - mean.num_clusters) / n;
    sd.ari += (r.ari - mean.ari) * (r.ari - mean.ari) / n;
    sd.lambda += (r.lambda - mean.lambda) * (r.lambda - mean.lambda) / n;
    sd.rounds += (r.rounds - mean.rounds) * (r.rounds - mean.rounds) / n;
  }
  sd.metric = std::sqrt(sd.metric);
  sd.num_clusters = std::sqrt(sd.num_clusters);
  sd.ari = std::sqrt(sd.ari);
  sd.lambda = std::sqrt(sd.lambda);
  sd.rounds = std::sqrt(sd.rounds);
  out.push_back(mean);
  out.push_back(sd);
  return out;
}

}  // namespace fpfc
