#pragma once

#include "fpfc/types.hpp"

namespace fpfc {

enum class ModelKind { LinearRegression, SoftmaxClassifier };

/// Shape of the per-device model. A classifier's flat vector is W (row-major,
/// classes x p) followed by the bias b (classes); a regression vector is the
/// p weights followed by the intercept when enabled.
struct ModelSpec {
  ModelKind kind = ModelKind::SoftmaxClassifier;
  std::size_t p = 0;
  std::size_t classes = 0;
  bool intercept = true;

  std::size_t d() const noexcept;
  bool higher_is_better() const noexcept { return kind == ModelKind::SoftmaxClassifier; }
  void validate() const;

  static ModelSpec softmax(std::size_t p, std::size_t classes);
  static ModelSpec linear(std::size_t p, bool intercept = true);
};

/// Mean squared error (no 1/2) or mean cross-entropy over the batch.
double loss(const ModelSpec& spec, const Eigen::Ref<const Vector>& omega, const Batch& batch);

Vector grad(const ModelSpec& spec, const Eigen::Ref<const Vector>& omega, const Batch& batch);

/// Loss and gradient in one pass; the gradient is written into `out`.
double loss_and_grad(const ModelSpec& spec, const Eigen::Ref<const Vector>& omega,
                     const Batch& batch, Vector& out);

/// Accuracy for classifiers, RMSE for regression.
double predict_metric(const ModelSpec& spec, const Eigen::Ref<const Vector>& omega,
                      const Batch& batch);

double loss(const ModelSpec& spec, const Eigen::Ref<const Vector>& omega, const DeviceData& data,
            const IndexList& subset);
Vector grad(const ModelSpec& spec, const Eigen::Ref<const Vector>& omega, const DeviceData& data,
            const IndexList& subset);
double predict_metric(const ModelSpec& spec, const Eigen::Ref<const Vector>& omega,
                      const DeviceData& data, const IndexList& subset);

/// Extreme eigenvalues of the squared-loss Hessian (2/n) X~^T X~ (X~ carries the
/// intercept column when enabled). Regression only.
struct Curvature {
  double largest = 0.0;
  double smallest = 0.0;
};
Curvature quadratic_curvature(const ModelSpec& spec, const Batch& batch);

}  // namespace fpfc
