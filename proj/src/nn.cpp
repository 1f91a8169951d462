#include "ipc/nn.hpp"

#include <cmath>

namespace ipc {

template <typename T>
Tensor<T> ParamStore<T>::add(const std::string& name, Shape shape) {
  for (const auto& [existing, _] : entries_) {
    if (existing == name) {
      throw ConfigError("duplicate parameter name " + name);
    }
  }
  auto t = Tensor<T>::zeros(std::move(shape), true);
  entries_.emplace_back(name, t);
  return t;
}

template <typename T>
Tensor<T> ParamStore<T>::add_xavier(const std::string& name, std::size_t fan_in,
                                    std::size_t fan_out, Rng& rng) {
  auto t = add(name, {fan_in, fan_out});
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : t.data()) {
    v = static_cast<T>(rng.uniform(-limit, limit));
  }
  return t;
}

template <typename T>
Tensor<T> ParamStore<T>::add_normal(const std::string& name, Shape shape, double stddev,
                                    Rng& rng) {
  auto t = add(name, std::move(shape));
  for (auto& v : t.data()) {
    v = static_cast<T>(rng.normal(0.0, stddev));
  }
  return t;
}

template <typename T>
Tensor<T> ParamStore<T>::add_constant(const std::string& name, Shape shape, T value) {
  auto t = add(name, std::move(shape));
  for (auto& v : t.data()) {
    v = value;
  }
  return t;
}

template <typename T>
Tensor<T> ParamStore<T>::get(const std::string& name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) {
      return t;
    }
  }
  throw LookupError("no parameter named " + name);
}

template <typename T>
std::size_t ParamStore<T>::scalar_count() const {
  std::size_t total = 0;
  for (const auto& [_, t] : entries_) {
    total += t.numel();
  }
  return total;
}

template <typename T>
void ParamStore<T>::zero_grad() {
  for (auto& [_, t] : entries_) {
    t.zero_grad();
  }
}

template <typename T>
Linear<T>::Linear(ParamStore<T>& store, const std::string& name, std::size_t in, std::size_t out,
                  Rng& rng)
    : weight(store.add_xavier(name + ".weight", in, out, rng)),
      bias(store.add(name + ".bias", {out})) {}

template <typename T>
LayerNorm<T>::LayerNorm(ParamStore<T>& store, const std::string& name, std::size_t width)
    : gamma(store.add_constant(name + ".gamma", {width}, T(1))),
      beta(store.add(name + ".beta", {width})) {}

template <typename T>
FeedForward<T>::FeedForward(ParamStore<T>& store, const std::string& name, std::size_t width,
                            std::size_t inner, Rng& rng)
    : up(store, name + ".up", width, inner, rng), down(store, name + ".down", inner, width, rng) {}

template <typename T>
MultiHeadAttention<T>::MultiHeadAttention(ParamStore<T>& store, const std::string& name,
                                          std::size_t width, std::size_t heads_, Rng& rng)
    : heads(heads_) {
  if (heads == 0 || width % heads != 0) {
    throw ConfigError("hidden width " + std::to_string(width) + " is not divisible by heads " +
                      std::to_string(heads));
  }
  wq = Linear<T>(store, name + ".q", width, width, rng);
  wk = Linear<T>(store, name + ".k", width, width, rng);
  wv = Linear<T>(store, name + ".v", width, width, rng);
  wo = Linear<T>(store, name + ".o", width, width, rng);
}

template <typename T>
Tensor<T> MultiHeadAttention<T>::operator()(const Tensor<T>& query, const Tensor<T>& key,
                                            const Tensor<T>& value,
                                            std::optional<std::size_t> valid_keys,
                                            AttentionMap* map) const {
  return wo(attention(wq(query), wk(key), wv(value), heads, valid_keys, map));
}

template <typename T>
Tensor<T> apply_dropout(const Tensor<T>& x, const ForwardContext& ctx) {
  if (!ctx.train || ctx.dropout == 0.0) {
    return x;
  }
  if (ctx.rng == nullptr) {
    throw ContractError("training-mode dropout needs a generator");
  }
  return dropout(x, ctx.dropout, true, *ctx.rng);
}

template <typename T>
TransformerBlock<T>::TransformerBlock(ParamStore<T>& store, const std::string& name,
                                      std::size_t width, std::size_t heads, std::size_t ffn_inner,
                                      Rng& rng)
    : attn(store, name + ".attn", width, heads, rng),
      norm1(store, name + ".ln1", width),
      ffn(store, name + ".ffn", width, ffn_inner, rng),
      norm2(store, name + ".ln2", width) {}

template <typename T>
Tensor<T> TransformerBlock<T>::operator()(const Tensor<T>& x, const ForwardContext& ctx,
                                          std::optional<std::size_t> valid_keys,
                                          AttentionMap* map) const {
  auto z = norm1(add(x, apply_dropout(attn(x, x, x, valid_keys, map), ctx)));
  return norm2(add(z, apply_dropout(ffn(z), ctx)));
}

template <typename T>
Tensor<T> positional_encoding(std::size_t length, std::size_t width) {
  if (length == 0) {
    throw ConfigError("positional encoding length must be >= 1");
  }
  if (width == 0 || width % 2 != 0) {
    throw ConfigError("positional encoding width must be even, got " + std::to_string(width));
  }
  std::vector<T> table(length * width);
  for (std::size_t p = 0; p < length; ++p) {
    for (std::size_t i = 0; i < width / 2; ++i) {
      const double angle = static_cast<double>(p) /
                           std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(width));
      table[p * width + 2 * i] = static_cast<T>(std::sin(angle));
      table[p * width + 2 * i + 1] = static_cast<T>(std::cos(angle));
    }
  }
  return Tensor<T>::from({length, width}, std::move(table));
}

template class ParamStore<float>;
template class ParamStore<double>;
template struct Linear<float>;
template struct Linear<double>;
template struct LayerNorm<float>;
template struct LayerNorm<double>;
template struct FeedForward<float>;
template struct FeedForward<double>;
template struct MultiHeadAttention<float>;
template struct MultiHeadAttention<double>;
template struct TransformerBlock<float>;
template struct TransformerBlock<double>;
template Tensor<float> apply_dropout(const Tensor<float>&, const ForwardContext&);
template Tensor<double> apply_dropout(const Tensor<double>&, const ForwardContext&);
template Tensor<float> positional_encoding(std::size_t, std::size_t);
template Tensor<double> positional_encoding(std::size_t, std::size_t);

}  // namespace ipc
