#pragma once

#include <cstdint>
#include <vector>

#include "ipc/nn.hpp"

namespace ipc {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-7;
};

/// Bias-corrected Adam with L2 weight decay folded into the gradient.
template <typename T>
class Adam {
 public:
  Adam(const ParamStore<T>& params, AdamOptions options);

  /// Applies one update at learning rate `lr` from the accumulated grads.
  /// Throws NumericError, leaving parameters and moments untouched, if any
  /// gradient is not finite.
  void step(double lr);
  void step() { step(options_.lr); }

  std::uint64_t steps() const { return step_; }
  const AdamOptions& options() const { return options_; }
  const std::vector<std::vector<double>>& first_moment() const { return m_; }
  const std::vector<std::vector<double>>& second_moment() const { return v_; }

 private:
  const ParamStore<T>* params_;
  AdamOptions options_;
  std::uint64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

/// Linear ramp from lr/warmup to lr over the first `warmup` steps, then flat.
class WarmupSchedule {
 public:
  WarmupSchedule(double lr, std::uint64_t warmup) : lr_(lr), warmup_(warmup) {}
  /// Learning rate for the 1-based update number.
  double at(std::uint64_t step) const;

 private:
  double lr_;
  std::uint64_t warmup_;
};

}  // namespace ipc
