#include "ipc/sie.hpp"

namespace ipc {

template <typename T>
Sie<T>::Sie(ParamStore<T>& store, const ModelConfig& config, Rng& rng)
    : hidden_(config.hidden), lengths_(config.lengths) {
  const std::size_t h = config.hidden;
  const std::size_t inner = h * config.ffn_mult;
  type_tokens_ = store.add_normal("sie.type_tokens", {kDocTypeCount, h}, 1.0, rng);
  std::array<Linear<T>, kDocTypeCount> shared;
  for (std::size_t l = 0; l < config.sie_layers; ++l) {
    const std::string prefix = "sie.layer" + std::to_string(l);
    Layer layer;
    layer.word = TransformerBlock<T>(store, prefix + ".word", h, config.heads, inner, rng);
    for (std::size_t t = 0; t < kDocTypeCount; ++t) {
      if (config.share_doc_fc && l > 0) {
        layer.fuse_fc[t] = shared[t];
        continue;
      }
      const std::string name = (config.share_doc_fc ? std::string("sie") : prefix) + ".fuse." +
                               std::string(kDocTypeNames[t]);
      layer.fuse_fc[t] = Linear<T>(store, name, config.lengths[t] * h, h, rng);
      shared[t] = layer.fuse_fc[t];
    }
    layer.doc = TransformerBlock<T>(store, prefix + ".doc", h, config.heads, inner, rng);
    layers_.push_back(std::move(layer));
  }
}

template <typename T>
Tensor<T> Sie<T>::word_level_layer(const Tensor<T>& words, std::size_t layer, std::size_t valid,
                                   const ForwardContext& ctx, AttentionMap* map) const {
  return layers_.at(layer).word(words, ctx, valid, map);
}

template <typename T>
Tensor<T> Sie<T>::doc_fuse(const Tensor<T>& type_token, const Tensor<T>& words, std::size_t valid,
                           const Linear<T>& fc) const {
  if (fc.in_features() != words.numel()) {
    throw ConfigError("vectorization FC expects width " + std::to_string(fc.in_features()) +
                      ", document gives " + std::to_string(words.numel()));
  }
  auto flat = reshape(zero_tail_rows(words, valid), {1, words.numel()});
  return add(fc(flat), reshape(type_token, {1, hidden_}));
}

template <typename T>
Tensor<T> Sie<T>::doc_level_layer(const Tensor<T>& fused, std::size_t layer,
                                  const ForwardContext& ctx, AttentionMap* map) const {
  return layers_.at(layer).doc(fused, ctx, std::nullopt, map);
}

template <typename T>
Tensor<T> Sie<T>::encode(std::span<const Tensor<T>> docs, std::span<const std::size_t> valid,
                         const ForwardContext& ctx, SieTrace* trace) const {
  if (docs.size() != kDocTypeCount || valid.size() != kDocTypeCount) {
    throw ConfigError("SIE expects " + std::to_string(kDocTypeCount) + " documents");
  }
  std::array<Tensor<T>, kDocTypeCount> words;
  for (std::size_t t = 0; t < kDocTypeCount; ++t) {
    if (docs[t].rank() != 2 || docs[t].shape()[0] != lengths_[t] || docs[t].shape()[1] != hidden_) {
      throw ConfigError("document " + std::string(kDocTypeNames[t]) + " has shape " +
                        shape_str(docs[t].shape()) + ", SIE was built for [" +
                        std::to_string(lengths_[t]) + "x" + std::to_string(hidden_) + "]");
    }
    // Positions restart at 0 in every document.
    words[t] = add(docs[t], positional_encoding<T>(lengths_[t], hidden_));
  }
  if (trace) {
    trace->word.assign(layers_.size(), {});
    trace->doc.assign(layers_.size(), {});
  }
  Tensor<T> tokens = type_tokens_;
  Tensor<T> out;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    std::array<Tensor<T>, kDocTypeCount> fused;
    for (std::size_t t = 0; t < kDocTypeCount; ++t) {
      words[t] = word_level_layer(words[t], l, valid[t], ctx, trace ? &trace->word[l][t] : nullptr);
      const std::size_t row = t;
      fused[t] = doc_fuse(take_rows(tokens, std::span<const std::size_t>(&row, 1)), words[t],
                          valid[t], layers_[l].fuse_fc[t]);
    }
    out = doc_level_layer(concat_rows<T>(fused), l, ctx, trace ? &trace->doc[l] : nullptr);
    tokens = out;
  }
  return out;
}

template class Sie<float>;
template class Sie<double>;

}  // namespace ipc
