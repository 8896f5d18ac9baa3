#include "fpfc/losses.hpp"

#include <cmath>

namespace fpfc {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_inputs(const ModelSpec& spec, const Eigen::Ref<const Vector>& omega,
                  const Batch& batch) {
  if (static_cast<std::size_t>(omega.size()) != spec.d()) {
    throw InvalidArgument("parameter length " + std::to_string(omega.size()) +
                          " does not match model dimension " + std::to_string(spec.d()));
  }
  if (batch.size() == 0) throw InvalidArgument("empty evaluation subset");
  if (static_cast<std::size_t>(batch.features.cols()) != spec.p) {
    throw InvalidArgument("feature dimension " + std::to_string(batch.features.cols()) +
                          " does not match model p = " + std::to_string(spec.p));
  }
}

Eigen::Index label_of(const Batch& batch, Eigen::Index r, std::size_t classes) {
  const double y = batch.targets(r);
  const auto k = static_cast<Eigen::Index>(y);
  if (k < 0 || static_cast<std::size_t>(k) >= classes || static_cast<double>(k) != y) {
    throw InvalidArgument("class label " + std::to_string(y) + " outside [0, " +
                          std::to_string(classes) + ")");
  }
  return k;
}

Vector linear_predictions(const ModelSpec& spec, const Eigen::Ref<const Vector>& omega,
                          const Batch& batch) {
  const auto p = static_cast<Eigen::Index>(spec.p);
  Vector yhat = batch.features * omega.head(p);
  if (spec.intercept) yhat.array() += omega(p);
  return yhat;
}

// n x C logits for a flat (W row-major, b) parameter vector.
Matrix logits(const ModelSpec& spec, const Eigen::Ref<const Vector>& omega, const Batch& batch) {
  const auto p = static_cast<Eigen::Index>(spec.p);
  const auto c = static_cast<Eigen::Index>(spec.classes);
  Eigen::Map<const RowMajorMatrix> w(omega.data(), c, p);
  Matrix z = batch.features * w.transpose();
  z.rowwise() += omega.segment(c * p, c).transpose();
  return z;
}

}  // namespace

std::size_t ModelSpec::d() const noexcept {
  if (kind == ModelKind::LinearRegression) return p + (intercept ? 1 : 0);
  return classes * p + classes;
}

void ModelSpec::validate() const {
  if (p == 0) throw InvalidArgument("model.p must be >= 1");
  if (kind == ModelKind::SoftmaxClassifier && classes < 2) {
    throw InvalidArgument("model.classes must be >= 2 for a classifier");
  }
}

ModelSpec ModelSpec::softmax(std::size_t p, std::size_t classes) {
  return ModelSpec{ModelKind::SoftmaxClassifier, p, classes, true};
}

ModelSpec ModelSpec::linear(std::size_t p, bool intercept) {
  return ModelSpec{ModelKind::LinearRegression, p, 0, intercept};
}

double loss_and_grad(const ModelSpec& spec, const Eigen::Ref<const Vector>& omega,
                     const Batch& batch, Vector& out) {
  check_inputs(spec, omega, batch);
  const auto n = static_cast<double>(batch.size());
  const auto p = static_cast<Eigen::Index>(spec.p);
  out.resize(omega.size());

  if (spec.kind == ModelKind::LinearRegression) {
    const Vector resid = batch.targets - linear_predictions(spec, omega, batch);
    out.head(p).noalias() = (-2.0 / n) * (batch.features.transpose() * resid);
    if (spec.intercept) out(p) = -2.0 / n * resid.sum();
    return resid.squaredNorm() / n;
  }

  const auto c = static_cast<Eigen::Index>(spec.classes);
  Matrix z = logits(spec, omega, batch);
  double total = 0.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const Eigen::Index y = label_of(batch, r, spec.classes);
    const double zmax = z.row(r).maxCoeff();
    const double shifted_y = z(r, y) - zmax;
    z.row(r).array() = (z.row(r).array() - zmax).exp();
    const double sum = z.row(r).sum();
    total += std::log(sum) - shifted_y;
    z.row(r) /= sum;
    z(r, y) -= 1.0;
  }
  // z now holds softmax - onehot.
  Eigen::Map<RowMajorMatrix> gw(out.data(), c, p);
  gw.noalias() = (1.0 / n) * (z.transpose() * batch.features);
  out.segment(c * p, c) = z.colwise().sum().transpose() / n;
  return total / n;
}

double loss(const ModelSpec& spec, const Eigen::Ref<const Vector>& omega, const Batch& batch) {
  check_inputs(spec, omega, batch);
  const auto n = static_cast<double>(batch.size());
  if (spec.kind == ModelKind::LinearRegression) {
    return (batch.targets - linear_predictions(spec, omega, batch)).squaredNorm() / n;
  }
  const Matrix z = logits(spec, omega, batch);
  double total = 0.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const Eigen::Index y = label_of(batch, r, spec.classes);
    const double zmax = z.row(r).maxCoeff();
    total += std::log((z.row(r).array() - zmax).exp().sum()) + zmax - z(r, y);
  }
  return total / n;
}

Vector grad(const ModelSpec& spec, const Eigen::Ref<const Vector>& omega, const Batch& batch) {
  Vector g;
  loss_and_grad(spec, omega, batch, g);
  return g;
}

double predict_metric(const ModelSpec& spec, const Eigen::Ref<const Vector>& omega,
                      const Batch& batch) {
  check_inputs(spec, omega, batch);
  const auto n = static_cast<double>(batch.size());
  if (spec.kind == ModelKind::LinearRegression) {
    return std::sqrt((batch.targets - linear_predictions(spec, omega, batch)).squaredNorm() / n);
  }
  const Matrix z = logits(spec, omega, batch);
  std::size_t correct = 0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    Eigen::Index arg = 0;
    z.row(r).maxCoeff(&arg);
    if (arg == label_of(batch, r, spec.classes)) ++correct;
  }
  return static_cast<double>(correct) / n;
}

double loss(const ModelSpec& spec, const Eigen::Ref<const Vector>& omega, const DeviceData& data,
            const IndexList& subset) {
  return loss(spec, omega, data.gather(subset));
}

Vector grad(const ModelSpec& spec, const Eigen::Ref<const Vector>& omega, const DeviceData& data,
            const IndexList& subset) {
  return grad(spec, omega, data.gather(subset));
}

double predict_metric(const ModelSpec& spec, const Eigen::Ref<const Vector>& omega,
                      const DeviceData& data, const IndexList& subset) {
  return predict_metric(spec, omega, data.gather(subset));
}

Curvature quadratic_curvature(const ModelSpec& spec, const Batch& batch) {
  if (spec.kind != ModelKind::LinearRegression) {
    throw InvalidArgument("curvature constants are only available for squared loss");
  }
  const auto n = static_cast<double>(batch.size());
  const auto p = batch.features.cols();
  Matrix design(batch.features.rows(), p + (spec.intercept ? 1 : 0));
  design.leftCols(p) = batch.features;
  if (spec.intercept) design.col(p).setOnes();
  const Matrix hessian = (2.0 / n) * (design.transpose() * design);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hessian, Eigen::EigenvaluesOnly);
  return Curvature{eig.eigenvalues().maxCoeff(), eig.eigenvalues().minCoeff()};
}

}  // namespace fpfc
