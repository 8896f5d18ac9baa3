#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fpfc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IndexList = std::vector<std::size_t>;

// ---------------------------------------------------------------------------
// Errors. Every failure the library reports derives from fpfc::Error so the
// runner can map categories onto exit codes.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidHyperParameter : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t device, long round, const std::string& what);
  std::size_t device() const noexcept { return device_; }
  long round() const noexcept { return round_; }

 private:
  std::size_t device_;
  long round_;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class SingularDesignError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Pair indexing. Only pairs (i, j) with i < j are stored; (j, i) is read as the
// negation of (i, j) and the diagonal is identically zero.

struct PairIndex {
  std::size_t first;   // min(i, j)
  std::size_t second;  // max(i, j)
  std::size_t offset;  // position in the packed upper triangle
  int sign;            // +1 if i < j, -1 otherwise
};

/// Canonical key and orientation of the ordered pair (i, j) among m devices.
/// Throws InvalidArgument for i == j or out-of-range ids.
PairIndex pair_index(std::size_t i, std::size_t j, std::size_t m);

/// Packed offset of (i, j) with i < j; no checking.
constexpr std::size_t pair_offset(std::size_t i, std::size_t j, std::size_t m) noexcept {
  return i * (2 * m - i - 1) / 2 + (j - i - 1);
}

constexpr std::size_t pair_count(std::size_t m) noexcept { return m * (m - 1) / 2; }

double l2_norm(const Eigen::Ref<const Vector>& x);

bool all_finite(const Eigen::Ref<const Matrix>& x);

// ---------------------------------------------------------------------------

/// Per-device parameter vectors, stored as the columns of a d x m matrix.
class ModelParams {
 public:
  ModelParams() = default;
  ModelParams(std::size_t m, std::size_t d);
  explicit ModelParams(Matrix columns);

  /// m copies of the same vector.
  static ModelParams replicated(const Vector& shared, std::size_t m);

  std::size_t m() const noexcept { return static_cast<std::size_t>(columns_.cols()); }
  std::size_t d() const noexcept { return static_cast<std::size_t>(columns_.rows()); }

  auto device(std::size_t i) { return columns_.col(static_cast<Eigen::Index>(i)); }
  auto device(std::size_t i) const { return columns_.col(static_cast<Eigen::Index>(i)); }

  const Matrix& matrix() const noexcept { return columns_; }
  Matrix& matrix() noexcept { return columns_; }

 private:
  Matrix columns_;
};

/// Auxiliary differences theta_ij and scaled duals v_ij for every unordered
/// device pair, packed column-wise in upper-triangle order.
class PairwiseState {
 public:
  PairwiseState() = default;
  PairwiseState(std::size_t m, std::size_t d, double rho);

  std::size_t m() const noexcept { return m_; }
  std::size_t d() const noexcept { return static_cast<std::size_t>(theta_.rows()); }
  std::size_t pairs() const noexcept { return static_cast<std::size_t>(theta_.cols()); }
  double rho() const noexcept { return rho_; }
  void set_rho(double rho);

  /// Logical theta_ij for any ordered pair; zero on the diagonal.
  Vector theta(std::size_t i, std::size_t j) const;
  Vector dual(std::size_t i, std::size_t j) const;

  auto theta_col(std::size_t offset) { return theta_.col(static_cast<Eigen::Index>(offset)); }
  auto theta_col(std::size_t offset) const { return theta_.col(static_cast<Eigen::Index>(offset)); }
  auto dual_col(std::size_t offset) { return dual_.col(static_cast<Eigen::Index>(offset)); }
  auto dual_col(std::size_t offset) const { return dual_.col(static_cast<Eigen::Index>(offset)); }

  const Matrix& theta_matrix() const noexcept { return theta_; }
  const Matrix& dual_matrix() const noexcept { return dual_; }
  Matrix& theta_matrix() noexcept { return theta_; }
  Matrix& dual_matrix() noexcept { return dual_; }

 private:
  Vector signed_column(const Matrix& packed, std::size_t i, std::size_t j) const;

  std::size_t m_ = 0;
  Matrix theta_;
  Matrix dual_;
  double rho_ = 1.0;
};

enum class PenaltyKind { SmoothedSCAD, GroupL1 };

const char* to_string(PenaltyKind kind);

struct HyperParams {
  double lambda = 0.0;
  double a = 3.7;
  double xi = 1e-4;
  double rho = 1.0;
  double alpha = 0.1;
  double nu = 0.1;

  /// Throws InvalidHyperParameter naming the offending field. rho == 0 is
  /// accepted only with lambda == 0 (uncoupled local training).
  void validate(PenaltyKind kind = PenaltyKind::SmoothedSCAD) const;
};

enum class Split { Train, Validation, Test };

/// Rows of one split, materialised for fast repeated evaluation.
struct Batch {
  Matrix features;  // n x p
  Vector targets;   // class index (as double) or real response
  std::size_t size() const noexcept { return static_cast<std::size_t>(features.rows()); }
};

class DeviceData {
 public:
  DeviceData() = default;
  DeviceData(Matrix features, Vector targets);

  std::size_t n() const noexcept { return static_cast<std::size_t>(features_.rows()); }
  std::size_t p() const noexcept { return static_cast<std::size_t>(features_.cols()); }

  const Matrix& features() const noexcept { return features_; }
  const Vector& targets() const noexcept { return targets_; }

  /// Assigns train/validation/test index sets; they must be disjoint and
  /// cover [0, n).
  void set_split(IndexList train, IndexList validation, IndexList test);
  bool has_split() const noexcept { return !train_idx_.empty(); }

  const IndexList& indices(Split s) const;
  const Batch& batch(Split s) const;

  /// Rows of an arbitrary index set.
  Batch gather(const IndexList& idx) const;

  /// Replaces feature values in place (e.g. standardisation); keeps splits.
  void transform_features(const std::function<void(Matrix&)>& fn);

 private:
  void rebuild_batches();

  Matrix features_;
  Vector targets_;
  IndexList train_idx_, val_idx_, test_idx_;
  Batch train_, val_, test_;
};

struct RoundTrace {
  long round = 0;
  IndexList active_set;
  double lambda_current = 0.0;
  double train_loss = 0.0;
  double val_metric = 0.0;
  double test_metric = 0.0;
  double aug_lagrangian = 0.0;
  std::size_t num_clusters = 0;
  double ari = 0.0;
  double sim_time_s = 0.0;
  double wall_ms = 0.0;
};

}  // namespace fpfc
