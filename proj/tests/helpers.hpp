#pragma once

#include "ipc/nn.hpp"
#include "oracle.hpp"

namespace testing {

template <typename T>
oracle::MhaParams mha_params(const ipc::MultiHeadAttention<T>& m) {
  using oracle::to_mat;
  using oracle::to_vec;
  return {to_mat(m.wq.weight), to_mat(m.wk.weight), to_mat(m.wv.weight), to_mat(m.wo.weight),
          to_vec(m.wq.bias),   to_vec(m.wk.bias),   to_vec(m.wv.bias),   to_vec(m.wo.bias),
          m.heads};
}

template <typename T>
oracle::BlockParams block_params(const ipc::TransformerBlock<T>& b) {
  using oracle::to_mat;
  using oracle::to_vec;
  return {mha_params(b.attn),         to_vec(b.norm1.gamma),      to_vec(b.norm1.beta),
          to_vec(b.norm2.gamma),      to_vec(b.norm2.beta),       to_mat(b.ffn.up.weight),
          to_mat(b.ffn.down.weight),  to_vec(b.ffn.up.bias),      to_vec(b.ffn.down.bias)};
}

/// Fills every parameter with small random values, biases and LN affines
/// included, so that oracle comparisons exercise every term.
template <typename T>
void randomize(ipc::ParamStore<T>& store, ipc::Rng& rng, double scale = 0.5) {
  for (const auto& [_, t] : store.entries()) {
    auto copy = t;
    for (auto& v : copy.data()) {
      v = static_cast<T>(rng.uniform(-scale, scale));
    }
  }
}

template <typename T>
ipc::Tensor<T> random_tensor(ipc::Shape shape, ipc::Rng& rng, bool requires_grad = false,
                             double scale = 1.0) {
  auto t = ipc::Tensor<T>::zeros(std::move(shape), requires_grad);
  for (auto& v : t.data()) {
    v = static_cast<T>(rng.uniform(-scale, scale));
  }
  return t;
}

inline oracle::Mat from_tensor_rows(const ipc::Tensor<double>& t) { return oracle::to_mat(t); }

}  // namespace testing
