#include "fpfc/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fpfc/rng.hpp"

namespace fpfc {

std::vector<double> Federation::sample_sizes(Split s) const {
  std::vector<double> out;
  out.reserve(devices.size());
  for (const auto& dev : devices) out.push_back(static_cast<double>(dev.batch(s).size()));
  return out;
}

void Federation::validate() const {
  if (devices.empty()) throw DataError("federation has no devices");
  spec.validate();
  for (std::size_t i = 0; i < devices.size(); ++i) {
    if (devices[i].p() != spec.p) {
      throw DataError("device " + std::to_string(i) + " has feature dimension " +
                      std::to_string(devices[i].p()) + ", expected " + std::to_string(spec.p));
    }
    if (!devices[i].has_split()) throw DataError("device " + std::to_string(i) + " has no split");
  }
  if (!true_labels.empty() && true_labels.size() != devices.size()) {
    throw DataError("true_labels length differs from device count");
  }
}

// ---------------------------------------------------------------------------

DeviceData split(DeviceData device, const SplitFractions& f, std::uint64_t seed) {
  if (!(f.train > 0.0 && f.validation > 0.0 && f.test > 0.0)) {
    throw InvalidArgument("split fractions must be positive");
  }
  if (f.train + f.validation + f.test > 1.0 + 1e-9) {
    throw InvalidArgument("split fractions must sum to at most 1");
  }
  const std::size_t n = device.n();
  const auto n_test = static_cast<std::size_t>(std::llround(f.test * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::llround(f.validation * static_cast<double>(n)));
  if (n_test == 0 || n_val == 0 || n_test + n_val >= n) {
    throw InvalidArgument("invalid split: n = " + std::to_string(n) +
                          " leaves an empty train, validation or test set");
  }
  IndexList order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t n_train = n - n_test - n_val;
  IndexList train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  IndexList val(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  IndexList test(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  device.set_split(std::move(train), std::move(val), std::move(test));
  return device;
}

// ---------------------------------------------------------------------------

Scenario parse_scenario(const std::string& name) {
  if (name == "S1") return Scenario::S1;
  if (name == "S2") return Scenario::S2;
  if (name == "S3") return Scenario::S3;
  if (name == "S4") return Scenario::S4;
  if (name == "S5") return Scenario::S5;
  throw InvalidArgument("unknown scenario '" + name + "' (expected S1..S5)");
}

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::S1: return "S1";
    case Scenario::S2: return "S2";
    case Scenario::S3: return "S3";
    case Scenario::S4: return "S4";
    case Scenario::S5: return "S5";
  }
  return "?";
}

SyntheticOptions scenario_options(Scenario s) {
  SyntheticOptions o;
  switch (s) {
    case Scenario::S1: o.cluster_sizes = {25, 25, 25, 25}; break;
    case Scenario::S2: o.cluster_sizes = {10, 40, 10, 40}; break;
    case Scenario::S3: o.cluster_sizes = {50, 50}; break;
    case Scenario::S4:
      o.cluster_sizes = {50};
      o.max_samples = 2500;
      break;
    case Scenario::S5:
      o.cluster_sizes.assign(50, 1);
      o.max_samples = 2500;
      break;
  }
  return o;
}

std::vector<std::size_t> power_law_sizes(std::size_t m, std::size_t min_n, std::size_t max_n,
                                         double skew, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double ratio = static_cast<double>(max_n) / static_cast<double>(min_n);
  std::vector<std::size_t> sizes(m);
  for (auto& n : sizes) {
    const double u = unif(rng);
    const double raw = static_cast<double>(min_n) * std::pow(ratio, std::pow(u, skew));
    n = std::clamp(static_cast<std::size_t>(std::llround(raw)), min_n, max_n);
  }
  return sizes;
}

Federation gen_synthetic(const SyntheticOptions& o, std::uint64_t seed) {
  if (o.cluster_sizes.empty()) throw InvalidArgument("synthetic federation needs clusters");
  const std::size_t m = std::accumulate(o.cluster_sizes.begin(), o.cluster_sizes.end(),
                                        std::size_t{0});
  const auto p = static_cast<Eigen::Index>(o.p);
  const auto c = static_cast<Eigen::Index>(o.classes);

  Federation fed;
  fed.spec = ModelSpec::softmax(o.p, o.classes);

  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  for (std::size_t l = 0; l < o.cluster_sizes.size(); ++l) {
    Rng rng = make_rng(seed, {tag(Stream::Data), 1, l});
    std::normal_distribution<double> normal(0.0, 1.0);
    const double mu = normal(rng);
    Matrix w(c, p);
    for (Eigen::Index r = 0; r < c; ++r)
      for (Eigen::Index k = 0; k < p; ++k) w(r, k) = mu + normal(rng);
    Vector b(c);
    for (Eigen::Index r = 0; r < c; ++r) b(r) = mu + normal(rng);

    Vector flat(c * p + c);
    for (Eigen::Index r = 0; r < c; ++r) flat.segment(r * p, p) = w.row(r).transpose();
    flat.tail(c) = b;
    fed.true_params.push_back(std::move(flat));
    weights.push_back(std::move(w));
    biases.push_back(std::move(b));
  }

  const auto sizes = power_law_sizes(m, o.min_samples, o.max_samples, o.size_skew,
                                     derive_seed(seed, {tag(Stream::Data), 2}));
  std::size_t device = 0;
  for (std::size_t l = 0; l < o.cluster_sizes.size(); ++l) {
    for (std::size_t k = 0; k < o.cluster_sizes[l]; ++k, ++device) {
      Rng rng = make_rng(seed, {tag(Stream::Data), 3, device});
      std::normal_distribution<double> normal(0.0, 1.0);
      const auto n = static_cast<Eigen::Index>(sizes[device]);
      Matrix x(n, p);
      for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index j = 0; j < p; ++j) x(r, j) = normal(rng);
      Matrix scores = x * weights[l].transpose();
      scores.rowwise() += biases[l].transpose();
      Vector y(n);
      for (Eigen::Index r = 0; r < n; ++r) {
        Eigen::Index arg = 0;
        Vector noisy = scores.row(r).transpose();
        for (Eigen::Index j = 0; j < c; ++j) noisy(j) += o.label_noise_sd * normal(rng);
        noisy.maxCoeff(&arg);
        y(r) = static_cast<double>(arg);
      }
      fed.devices.push_back(split(DeviceData(std::move(x), std::move(y)), o.fractions,
                                  derive_seed(seed, {tag(Stream::Split), device})));
      fed.true_labels.push_back(static_cast<int>(l));
    }
  }
  return fed;
}

Federation gen_synthetic(Scenario scenario, std::uint64_t seed) {
  return gen_synthetic(scenario_options(scenario), seed);
}

// ---------------------------------------------------------------------------

Federation gen_linear_clusters(const LinearClusterOptions& o, std::uint64_t seed) {
  if (!(o.gap > 0.0)) throw InvalidArgument("cluster gap b must be > 0");
  if (o.clusters == 0 || o.clusters > o.m) throw InvalidArgument("need 1 <= clusters <= m");
  const std::size_t dim = o.d + (o.intercept ? 1 : 0);

  Federation fed;
  fed.spec = ModelSpec::linear(o.d, o.intercept);

  Rng prng = make_rng(seed, {tag(Stream::Data), 10});
  std::normal_distribution<double> pnormal(0.0, 1.0);
  const double scale = o.gap;
  for (int attempt = 0;; ++attempt) {
    if (attempt > 10000) throw Error("could not draw separated cluster parameters");
    fed.true_params.clear();
    for (std::size_t l = 0; l < o.clusters; ++l) {
      Vector alpha(static_cast<Eigen::Index>(dim));
      for (auto& v : alpha) v = scale * pnormal(prng);
      fed.true_params.push_back(std::move(alpha));
    }
    bool ok = true;
    for (std::size_t l = 0; l < o.clusters && ok; ++l)
      for (std::size_t k = l + 1; k < o.clusters && ok; ++k)
        ok = (fed.true_params[l] - fed.true_params[k]).norm() >= o.gap;
    if (ok) break;
  }

  const auto p = static_cast<Eigen::Index>(o.d);
  for (std::size_t i = 0; i < o.m; ++i) {
    const std::size_t l = i * o.clusters / o.m;
    Rng rng = make_rng(seed, {tag(Stream::Data), 11, i});
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>(o.n_per_device);
    Matrix x(n, p);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index j = 0; j < p; ++j) x(r, j) = normal(rng);
    const Vector& alpha = fed.true_params[l];
    Vector y = x * alpha.head(p);
    if (o.intercept) y.array() += alpha(p);
    for (auto& v : y) v += o.noise * normal(rng);
    fed.devices.push_back(split(DeviceData(std::move(x), std::move(y)), o.fractions,
                                derive_seed(seed, {tag(Stream::Split), i})));
    fed.true_labels.push_back(static_cast<int>(l));
  }
  return fed;
}

// ---------------------------------------------------------------------------

CsvTable parse_csv(const std::string& text, const std::string& origin) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;

  auto split_fields = [](const std::string& s) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : s) {
      if (ch == ',') {
        fields.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur.push_back(ch);
      }
    }
    fields.push_back(cur);
    return fields;
  };
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\"");
    const auto e = s.find_last_not_of(" \t\"");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_fields(line);
    if (table.header.empty()) {
      for (auto& f : fields) table.header.push_back(trim(f));
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError(origin + ": expected " + std::to_string(table.header.size()) +
                           " fields, found " + std::to_string(fields.size()),
                       line_no, fields.size());
    }
    std::vector<double> row(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const std::string cell = trim(fields[k]);
      double v = 0.0;
      const auto* first = cell.data();
      const auto* last = cell.data() + cell.size();
      const auto res = std::from_chars(first, last, v);
      if (cell.empty() || res.ec != std::errc{} || res.ptr != last) {
        throw ParseError(origin + ": non-numeric cell '" + cell + "' in column '" +
                             table.header[k] + "'",
                         line_no, k + 1);
      }
      row[k] = v;
    }
    rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw ParseError(origin + ": missing header row", 1, 1);
  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t k = 0; k < rows[r].size(); ++k)
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = rows[r][k];
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open CSV file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), path.string());
}

namespace {

void standardize_with_train_stats(DeviceData& dev) {
  const Batch& train = dev.batch(Split::Train);
  const Eigen::RowVectorXd mean = train.features.colwise().mean();
  Eigen::RowVectorXd sd(mean.size());
  for (Eigen::Index k = 0; k < mean.size(); ++k) {
    const double var = (train.features.col(k).array() - mean(k)).square().mean();
    sd(k) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  dev.transform_features([&](Matrix& x) {
    x.rowwise() -= mean;
    x.array().rowwise() /= sd.array();
  });
}

}  // namespace

Federation load_csv_federation(const CsvPlan& plan, std::uint64_t seed) {
  if (plan.sources.empty()) throw SchemaError("CSV plan lists no files");
  Federation fed;
  std::size_t width = 0;

  struct Part {
    Matrix x;
    Vector y;
    int label;
  };
  std::vector<Part> parts;

  for (std::size_t s = 0; s < plan.sources.size(); ++s) {
    const auto& src = plan.sources[s];
    if (src.devices == 0) throw SchemaError("CSV source " + src.path.string() + " has 0 devices");
    const CsvTable table = read_csv(src.path);
    const auto it = std::find(table.header.begin(), table.header.end(), plan.response);
    if (it == table.header.end()) {
      throw SchemaError(src.path.string() + ": missing response column '" + plan.response + "'");
    }
    const auto resp = static_cast<Eigen::Index>(it - table.header.begin());
    const Eigen::Index rows = table.values.rows();
    const Eigen::Index cols = table.values.cols() - 1;
    if (rows < 1) throw SchemaError(src.path.string() + ": no data rows");

    std::size_t target_width = std::max<std::size_t>(static_cast<std::size_t>(cols),
                                                     plan.pad_features_to);
    Matrix x(rows, static_cast<Eigen::Index>(target_width));
    Vector y = table.values.col(resp);
    for (Eigen::Index k = 0, out = 0; k < table.values.cols(); ++k) {
      if (k == resp) continue;
      x.col(out++) = table.values.col(k);
    }
    Rng pad_rng = make_rng(seed, {tag(Stream::Data), 20, s});
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto k = cols; k < static_cast<Eigen::Index>(target_width); ++k)
      for (Eigen::Index r = 0; r < rows; ++r) x(r, k) = normal(pad_rng);

    if (width == 0) width = target_width;
    if (width != target_width) {
      throw SchemaError(src.path.string() + ": feature count " + std::to_string(target_width) +
                        " differs from earlier sources (" + std::to_string(width) + ")");
    }

    IndexList order(static_cast<std::size_t>(rows));
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = make_rng(seed, {tag(Stream::Data), 21, s});
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    std::vector<IndexList> dealt(src.devices);
    for (std::size_t r = 0; r < order.size(); ++r) dealt[r % src.devices].push_back(order[r]);
    for (auto& rowset : dealt) {
      if (rowset.empty()) throw SchemaError(src.path.string() + ": more devices than rows");
      Part part{Matrix(static_cast<Eigen::Index>(rowset.size()), x.cols()),
                Vector(static_cast<Eigen::Index>(rowset.size())), static_cast<int>(s)};
      for (std::size_t r = 0; r < rowset.size(); ++r) {
        part.x.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rowset[r]));
        part.y(static_cast<Eigen::Index>(r)) = y(static_cast<Eigen::Index>(rowset[r]));
      }
      parts.push_back(std::move(part));
    }
  }

  fed.spec = ModelSpec::linear(width, true);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    DeviceData dev = split(DeviceData(std::move(parts[i].x), std::move(parts[i].y)),
                           plan.fractions, derive_seed(seed, {tag(Stream::Split), i}));
    if (plan.standardize) standardize_with_train_stats(dev);
    fed.devices.push_back(std::move(dev));
    fed.true_labels.push_back(parts[i].label);
  }
  return fed;
}

}  // namespace fpfc
