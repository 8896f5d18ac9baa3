#pragma once

#include <chrono>
#include <vector>

#include "fpfc/engine.hpp"

namespace fpfc::detail {

/// Per-device training loss and split metrics, refreshed only for devices
/// whose parameters changed.
class MetricCache {
 public:
  MetricCache(const Federation& fed, bool losses, bool splits);

  void refresh(const Federation& fed, const ModelParams& omega, const IndexList& devices);
  void refresh_all(const Federation& fed, const ModelParams& omega);

  const std::vector<double>& train_losses() const noexcept { return train_loss_; }
  double pooled_train_loss() const;
  double pooled_metric(Split s) const;

 private:
  bool losses_;
  bool splits_;
  bool regression_;
  std::vector<double> train_loss_;
  std::vector<double> val_, test_;  // accuracy or MSE per device
  std::vector<double> n_train_, n_val_, n_test_;
};

RoundTrace make_trace(long round, const IndexList& active, const EngineState& state,
                      const MetricCache& cache, const Federation& fed, const HyperParams& hp,
                      const EngineOptions& options);

void check_options(const Federation& fed, const HyperParams& hp, const EngineOptions& options);

using Clock = std::chrono::steady_clock;

inline double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

}  // namespace fpfc::detail
