#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ipc/rng.hpp"
#include "ipc/tensor.hpp"

namespace ipc {

/// Owns every trainable tensor of a model under a unique dotted name, in
/// registration order. The order is the checkpoint order.
template <typename T>
class ParamStore {
 public:
  Tensor<T> add(const std::string& name, Shape shape);
  Tensor<T> add_xavier(const std::string& name, std::size_t fan_in, std::size_t fan_out, Rng& rng);
  Tensor<T> add_normal(const std::string& name, Shape shape, double stddev, Rng& rng);
  Tensor<T> add_constant(const std::string& name, Shape shape, T value);

  const std::vector<std::pair<std::string, Tensor<T>>>& entries() const { return entries_; }
  Tensor<T> get(const std::string& name) const;
  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<std::pair<std::string, Tensor<T>>> entries_;
};

/// y = x W + b with W stored [in x out].
template <typename T>
struct Linear {
  Tensor<T> weight;
  Tensor<T> bias;

  Linear() = default;
  Linear(ParamStore<T>& store, const std::string& name, std::size_t in, std::size_t out, Rng& rng);
  Tensor<T> operator()(const Tensor<T>& x) const { return add_bias(matmul(x, weight), bias); }
  std::size_t in_features() const { return weight.shape()[0]; }
  std::size_t out_features() const { return weight.shape()[1]; }
};

template <typename T>
struct LayerNorm {
  Tensor<T> gamma;
  Tensor<T> beta;

  LayerNorm() = default;
  LayerNorm(ParamStore<T>& store, const std::string& name, std::size_t width);
  Tensor<T> operator()(const Tensor<T>& x) const { return layer_norm(x, gamma, beta); }
};

/// Two-layer ReLU feed-forward network, width -> inner -> width.
template <typename T>
struct FeedForward {
  Linear<T> up;
  Linear<T> down;

  FeedForward() = default;
  FeedForward(ParamStore<T>& store, const std::string& name, std::size_t width, std::size_t inner,
              Rng& rng);
  Tensor<T> operator()(const Tensor<T>& x) const { return down(relu(up(x))); }
};

/// Projects q/k/v with h x h matrices, splits the width across heads, and
/// recombines through the output projection.
template <typename T>
struct MultiHeadAttention {
  Linear<T> wq, wk, wv, wo;
  std::size_t heads = 1;

  MultiHeadAttention() = default;
  MultiHeadAttention(ParamStore<T>& store, const std::string& name, std::size_t width,
                     std::size_t heads, Rng& rng);
  Tensor<T> operator()(const Tensor<T>& query, const Tensor<T>& key, const Tensor<T>& value,
                       std::optional<std::size_t> valid_keys = std::nullopt,
                       AttentionMap* map = nullptr) const;
};

/// Per-forward switches shared by every layer.
struct ForwardContext {
  bool train = false;
  double dropout = 0.0;
  Rng* rng = nullptr;
};

template <typename T>
Tensor<T> apply_dropout(const Tensor<T>& x, const ForwardContext& ctx);

/// Post-norm transformer block:
///   Z = LN(X + Drop(MHA(X, X, X)));  out = LN(Z + Drop(FFN(Z)))
template <typename T>
struct TransformerBlock {
  MultiHeadAttention<T> attn;
  LayerNorm<T> norm1;
  FeedForward<T> ffn;
  LayerNorm<T> norm2;

  TransformerBlock() = default;
  TransformerBlock(ParamStore<T>& store, const std::string& name, std::size_t width,
                   std::size_t heads, std::size_t ffn_inner, Rng& rng);
  Tensor<T> operator()(const Tensor<T>& x, const ForwardContext& ctx,
                       std::optional<std::size_t> valid_keys = std::nullopt,
                       AttentionMap* map = nullptr) const;
};

/// Sinusoidal table: pe[p, 2i] = sin(p / 10000^(2i/h)), pe[p, 2i+1] = cos(same).
template <typename T>
Tensor<T> positional_encoding(std::size_t length, std::size_t width);

}  // namespace ipc
