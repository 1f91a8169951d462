#include "ipc/fusion.hpp"

namespace ipc {

template <typename T>
Fusion<T>::Fusion(ParamStore<T>& store, const ModelConfig& config, Rng& rng)
    : hidden_(config.hidden) {
  const std::size_t h = config.hidden;
  for (std::size_t l = 0; l < config.fusion_layers; ++l) {
    const std::string p = "fusion.block" + std::to_string(l);
    Block b;
    b.self_attn = MultiHeadAttention<T>(store, p + ".self", h, config.heads, rng);
    b.norm1 = LayerNorm<T>(store, p + ".ln1", h);
    b.cross_attn = MultiHeadAttention<T>(store, p + ".cross", h, config.heads, rng);
    b.norm2 = LayerNorm<T>(store, p + ".ln2", h);
    b.ffn = FeedForward<T>(store, p + ".ffn", h, h * config.ffn_mult, rng);
    b.norm3 = LayerNorm<T>(store, p + ".ln3", h);
    blocks_.push_back(std::move(b));
  }
}

template <typename T>
Tensor<T> Fusion<T>::block_step1(const Tensor<T>& state, std::size_t block,
                                 const ForwardContext& ctx, AttentionMap* map) const {
  const auto& b = blocks_.at(block);
  return b.norm1(add(state, apply_dropout(b.self_attn(state, state, state, std::nullopt, map), ctx)));
}

template <typename T>
Tensor<T> Fusion<T>::block_step2(const Tensor<T>& state, const Tensor<T>& doc, std::size_t block,
                                 const ForwardContext& ctx, AttentionMap* map) const {
  const auto& b = blocks_.at(block);
  auto z = b.norm2(add(state, apply_dropout(b.cross_attn(state, doc, doc, std::nullopt, map), ctx)));
  return b.norm3(add(z, apply_dropout(b.ffn(z), ctx)));
}

template <typename T>
Tensor<T> Fusion<T>::fuse(const Tensor<T>& history, const Tensor<T>& doc, const ForwardContext& ctx,
                          std::vector<AttentionMap>* cross_maps,
                          std::vector<AttentionMap>* self_maps) const {
  if (history.rank() != 2 || history.cols() != hidden_ || doc.rank() != 2 ||
      doc.cols() != hidden_) {
    throw ConfigError("fusion expects width " + std::to_string(hidden_) + ", got history " +
                      shape_str(history.shape()) + " and document " + shape_str(doc.shape()));
  }
  if (cross_maps) {
    cross_maps->assign(blocks_.size(), {});
  }
  if (self_maps) {
    self_maps->assign(blocks_.size(), {});
  }
  auto state = add(history, positional_encoding<T>(history.rows(), hidden_));
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    state = block_step1(state, l, ctx, self_maps ? &(*self_maps)[l] : nullptr);
    state = block_step2(state, doc, l, ctx, cross_maps ? &(*cross_maps)[l] : nullptr);
  }
  return state;
}

template class Fusion<float>;
template class Fusion<double>;

}  // namespace ipc
