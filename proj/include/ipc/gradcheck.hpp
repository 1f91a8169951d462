#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ipc/rng.hpp"
#include "ipc/tensor.hpp"

namespace ipc {

struct GradCheckOptions {
  double eps = 1e-5;
  /// Coordinates sampled per parameter tensor; 0 checks all of them.
  std::size_t samples_per_param = 0;
  /// Denominator floor of the relative error, so that near-zero gradients are
  /// compared absolutely.
  double floor = 1e-5;
  std::uint64_t seed = 0;
};

/// Compares reverse-mode gradients of the scalar `loss` against central
/// differences on the given 64-bit parameters and returns the maximum
/// relative error |a - n| / max(|a|, |n|, floor). `loss` must be deterministic.
inline double grad_check(const std::function<Tensor<double>()>& loss,
                         std::span<Tensor<double>> params, GradCheckOptions options = {}) {
  for (auto& p : params) {
    p.zero_grad();
  }
  loss().backward();
  std::vector<std::vector<double>> analytic;
  for (auto& p : params) {
    auto g = p.grad();
    analytic.emplace_back(g.begin(), g.end());
  }
  Rng rng(options.seed);
  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto data = params[pi].data();
    std::vector<std::size_t> coords(data.size());
    for (std::size_t i = 0; i < coords.size(); ++i) {
      coords[i] = i;
    }
    if (options.samples_per_param != 0 && options.samples_per_param < coords.size()) {
      rng.shuffle(coords.begin(), coords.end());
      coords.resize(options.samples_per_param);
    }
    for (std::size_t i : coords) {
      const double saved = data[i];
      data[i] = saved + options.eps;
      const double up = loss().item();
      data[i] = saved - options.eps;
      const double down = loss().item();
      data[i] = saved;
      const double numeric = (up - down) / (2.0 * options.eps);
      const double a = analytic[pi][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.floor});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace ipc
