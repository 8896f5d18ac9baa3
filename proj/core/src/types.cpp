#include "fpfc/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fpfc {

DivergenceError::DivergenceError(std::size_t device, long round, const std::string& what)
    : Error("divergence on device " + std::to_string(device) + " in round " +
            std::to_string(round) + ": " + what),
      device_(device),
      round_(round) {}

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : DataError(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) +
                ")"),
      line_(line),
      column_(column) {}

PairIndex pair_index(std::size_t i, std::size_t j, std::size_t m) {
  if (i >= m || j >= m) {
    throw InvalidArgument("pair (" + std::to_string(i) + ", " + std::to_string(j) +
                          ") out of range for m = " + std::to_string(m));
  }
  if (i == j) {
    throw InvalidArgument("invalid pair: diagonal (" + std::to_string(i) + ", " +
                          std::to_string(j) + ") is not stored");
  }
  const std::size_t lo = std::min(i, j);
  const std::size_t hi = std::max(i, j);
  return PairIndex{lo, hi, pair_offset(lo, hi, m), i < j ? 1 : -1};
}

double l2_norm(const Eigen::Ref<const Vector>& x) { return x.norm(); }

bool all_finite(const Eigen::Ref<const Matrix>& x) { return x.allFinite(); }

// ---------------------------------------------------------------------------

ModelParams::ModelParams(std::size_t m, std::size_t d)
    : columns_(Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(m))) {}

ModelParams::ModelParams(Matrix columns) : columns_(std::move(columns)) {
  if (!columns_.allFinite()) {
    throw InvalidArgument("model parameters contain non-finite entries");
  }
}

ModelParams ModelParams::replicated(const Vector& shared, std::size_t m) {
  Matrix cols(shared.size(), static_cast<Eigen::Index>(m));
  cols.colwise() = shared;
  return ModelParams(std::move(cols));
}

// ---------------------------------------------------------------------------

PairwiseState::PairwiseState(std::size_t m, std::size_t d, double rho)
    : m_(m),
      theta_(Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(pair_count(m)))),
      dual_(Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(pair_count(m)))) {
  set_rho(rho);
}

void PairwiseState::set_rho(double rho) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) {
    throw InvalidHyperParameter("hyperparams.rho must be finite and non-negative");
  }
  rho_ = rho;
}

Vector PairwiseState::signed_column(const Matrix& packed, std::size_t i, std::size_t j) const {
  if (i == j) {
    if (i >= m_) throw InvalidArgument("device id out of range");
    return Vector::Zero(packed.rows());
  }
  const PairIndex key = pair_index(i, j, m_);
  Vector out = packed.col(static_cast<Eigen::Index>(key.offset));
  if (key.sign < 0) out = -out;
  return out;
}

Vector PairwiseState::theta(std::size_t i, std::size_t j) const {
  return signed_column(theta_, i, j);
}

Vector PairwiseState::dual(std::size_t i, std::size_t j) const {
  return signed_column(dual_, i, j);
}

// ---------------------------------------------------------------------------

const char* to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::SmoothedSCAD: return "smoothed-scad";
    case PenaltyKind::GroupL1: return "group-l1";
  }
  return "unknown";
}

namespace {

void require(bool ok, const char* field, const std::string& why) {
  if (!ok) throw InvalidHyperParameter(std::string("hyperparams.") + field + ": " + why);
}

}  // namespace

void HyperParams::validate(PenaltyKind kind) const {
  require(std::isfinite(lambda) && lambda >= 0.0, "lambda", "must be finite and >= 0");
  require(std::isfinite(a) && a > 1.0, "a", "must be finite and > 1");
  require(std::isfinite(rho) && rho >= 0.0, "rho", "must be finite and >= 0");
  require(rho > 0.0 || lambda == 0.0, "rho", "must be > 0 when lambda > 0");
  require(std::isfinite(alpha) && alpha > 0.0, "alpha", "must be finite and > 0");
  require(std::isfinite(nu) && nu >= 0.0, "nu", "must be finite and >= 0");
  require(std::isfinite(xi), "xi", "must be finite");
  if (lambda > 0.0 && kind == PenaltyKind::SmoothedSCAD) {
    require(xi > 0.0 && xi < lambda, "xi", "must satisfy 0 < xi < lambda");
    require((a - 1.0) * rho > 1.0, "rho", "must satisfy (a - 1) * rho > 1");
  }
}

// ---------------------------------------------------------------------------

DeviceData::DeviceData(Matrix features, Vector targets)
    : features_(std::move(features)), targets_(std::move(targets)) {
  if (features_.rows() != targets_.size()) {
    throw InvalidArgument("feature rows and target length differ");
  }
  if (features_.rows() < 1) throw InvalidArgument("device dataset must have n >= 1");
}

void DeviceData::set_split(IndexList train, IndexList validation, IndexList test) {
  std::vector<char> seen(n(), 0);
  for (const IndexList* part : {&train, &validation, &test}) {
    for (std::size_t idx : *part) {
      if (idx >= n()) throw InvalidArgument("split index out of range");
      if (seen[idx]) throw InvalidArgument("split sets overlap at row " + std::to_string(idx));
      seen[idx] = 1;
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw InvalidArgument("split sets do not cover every row");
  }
  if (train.empty()) throw InvalidArgument("training split is empty");
  train_idx_ = std::move(train);
  val_idx_ = std::move(validation);
  test_idx_ = std::move(test);
  rebuild_batches();
}

const IndexList& DeviceData::indices(Split s) const {
  switch (s) {
    case Split::Train: return train_idx_;
    case Split::Validation: return val_idx_;
    case Split::Test: return test_idx_;
  }
  return train_idx_;
}

const Batch& DeviceData::batch(Split s) const {
  switch (s) {
    case Split::Train: return train_;
    case Split::Validation: return val_;
    case Split::Test: return test_;
  }
  return train_;
}

Batch DeviceData::gather(const IndexList& idx) const {
  Batch b;
  b.features.resize(static_cast<Eigen::Index>(idx.size()), features_.cols());
  b.targets.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= n()) throw InvalidArgument("subset index out of range");
    b.features.row(static_cast<Eigen::Index>(r)) = features_.row(static_cast<Eigen::Index>(idx[r]));
    b.targets(static_cast<Eigen::Index>(r)) = targets_(static_cast<Eigen::Index>(idx[r]));
  }
  return b;
}

void DeviceData::transform_features(const std::function<void(Matrix&)>& fn) {
  fn(features_);
  if (has_split()) rebuild_batches();
}

void DeviceData::rebuild_batches() {
  train_ = gather(train_idx_);
  val_ = gather(val_idx_);
  test_ = gather(test_idx_);
}

}  // namespace fpfc
