#include "ipc/optim.hpp"

#include <algorithm>
#include <cmath>

namespace ipc {

template <typename T>
Adam<T>::Adam(const ParamStore<T>& params, AdamOptions options)
    : params_(&params), options_(options) {
  if (!(options_.lr > 0.0)) {
    throw ConfigError("Adam learning rate must be positive");
  }
  for (const auto& [_, t] : params.entries()) {
    m_.emplace_back(t.numel(), 0.0);
    v_.emplace_back(t.numel(), 0.0);
  }
}

template <typename T>
void Adam<T>::step(double lr) {
  if (!(lr > 0.0)) {
    throw ConfigError("Adam learning rate must be positive");
  }
  const auto& entries = params_->entries();
  if (entries.size() != m_.size()) {
    throw ContractError("parameter set changed after optimizer construction");
  }
  for (const auto& [name, t] : entries) {
    if (!t.requires_grad()) {
      continue;
    }
    for (T g : t.grad()) {
      if (!std::isfinite(g)) {
        throw NumericError("non-finite gradient in " + name + "; update refused");
      }
    }
  }
  ++step_;
  const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(step_));
  for (std::size_t p = 0; p < entries.size(); ++p) {
    Tensor<T> t = entries[p].second;
    if (!t.requires_grad()) {
      continue;
    }
    auto data = t.data();
    auto grad = t.grad();
    auto& m = m_[p];
    auto& v = v_[p];
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double g = static_cast<double>(grad[i]) + options_.weight_decay * static_cast<double>(data[i]);
      m[i] = options_.beta1 * m[i] + (1.0 - options_.beta1) * g;
      v[i] = options_.beta2 * v[i] + (1.0 - options_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      data[i] = static_cast<T>(static_cast<double>(data[i]) - lr * mhat / (std::sqrt(vhat) + options_.eps));
    }
  }
}

double WarmupSchedule::at(std::uint64_t step) const {
  if (warmup_ == 0 || step >= warmup_) {
    return lr_;
  }
  return lr_ * static_cast<double>(std::max<std::uint64_t>(step, 1)) / static_cast<double>(warmup_);
}

template class Adam<float>;
template class Adam<double>;

}  // namespace ipc
