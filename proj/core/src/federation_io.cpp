#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "fpfc/data.hpp"

namespace fpfc {

namespace {

using nlohmann::json;

const char* kind_name(ModelKind k) {
  return k == ModelKind::SoftmaxClassifier ? "softmax" : "linear";
}

json vector_json(const Vector& v) {
  json arr = json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

Vector vector_from(const json& arr) {
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t k = 0; k < arr.size(); ++k) v(static_cast<Eigen::Index>(k)) = arr[k].get<double>();
  return v;
}

void write_device_csv(const DeviceData& dev, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw DataError("cannot write " + path.string());
  for (std::size_t k = 0; k < dev.p(); ++k) std::fprintf(f, "x%zu,", k);
  std::fprintf(f, "y\n");
  const Matrix& x = dev.features();
  const Vector& y = dev.targets();
  char buf[64];
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,", x(r, k));
      std::fputs(buf, f);
    }
    std::snprintf(buf, sizeof buf, "%.17g\n", y(r));
    std::fputs(buf, f);
  }
  std::fclose(f);
}

}  // namespace

void write_federation(const Federation& fed, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["format"] = "fpfc-federation";
  manifest["version"] = 1;
  manifest["spec"] = {{"kind", kind_name(fed.spec.kind)},
                      {"p", fed.spec.p},
                      {"classes", fed.spec.classes},
                      {"intercept", fed.spec.intercept}};
  json devices = json::array();
  for (std::size_t i = 0; i < fed.devices.size(); ++i) {
    const auto& dev = fed.devices[i];
    const std::string file = "device_" + std::to_string(i) + ".csv";
    write_device_csv(dev, dir / file);
    devices.push_back({{"file", file},
                       {"train", dev.indices(Split::Train)},
                       {"validation", dev.indices(Split::Validation)},
                       {"test", dev.indices(Split::Test)}});
  }
  manifest["devices"] = devices;
  manifest["true_labels"] = fed.true_labels;
  json params = json::array();
  for (const auto& v : fed.true_params) params.push_back(vector_json(v));
  manifest["true_params"] = params;

  std::ofstream out(dir / "manifest.json");
  if (!out) throw DataError("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

Federation read_federation(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw DataError("cannot open " + (dir / "manifest.json").string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("manifest.json: ") + e.what(), 0, e.byte);
  }

  Federation fed;
  try {
    if (manifest.at("format").get<std::string>() != "fpfc-federation") {
      throw SchemaError("manifest.json: unexpected format tag");
    }
    const auto& spec = manifest.at("spec");
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "softmax") {
      fed.spec = ModelSpec::softmax(spec.at("p").get<std::size_t>(),
                                    spec.at("classes").get<std::size_t>());
    } else if (kind == "linear") {
      fed.spec = ModelSpec::linear(spec.at("p").get<std::size_t>(),
                                   spec.at("intercept").get<bool>());
    } else {
      throw SchemaError("manifest.json: unknown spec.kind '" + kind + "'");
    }
    for (const auto& entry : manifest.at("devices")) {
      const CsvTable table = read_csv(dir / entry.at("file").get<std::string>());
      const Eigen::Index cols = table.values.cols();
      if (cols < 2 || table.header.back() != "y") {
        throw SchemaError("device file " + entry.at("file").get<std::string>() +
                          " must end with a 'y' column");
      }
      DeviceData dev(table.values.leftCols(cols - 1), table.values.col(cols - 1));
      dev.set_split(entry.at("train").get<IndexList>(), entry.at("validation").get<IndexList>(),
                    entry.at("test").get<IndexList>());
      fed.devices.push_back(std::move(dev));
    }
    fed.true_labels = manifest.at("true_labels").get<std::vector<int>>();
    for (const auto& v : manifest.at("true_params")) fed.true_params.push_back(vector_from(v));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("manifest.json: ") + e.what());
  }
  fed.validate();
  return fed;
}

}  // namespace fpfc
