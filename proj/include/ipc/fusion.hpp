#pragma once

#include <vector>

#include "ipc/config.hpp"
#include "ipc/nn.hpp"

namespace ipc {

/// Information fusion over the label history E_{<k} [k x h] and the proposal
/// matrix D [|T| x h]. Each block runs full (unmasked) self-attention over the
/// history, cross-attention with the history as query into D, and a
/// feed-forward layer, each wrapped as LN(x + sublayer(x)).
template <typename T>
class Fusion {
 public:
  struct Block {
    MultiHeadAttention<T> self_attn;
    LayerNorm<T> norm1;
    MultiHeadAttention<T> cross_attn;
    LayerNorm<T> norm2;
    FeedForward<T> ffn;
    LayerNorm<T> norm3;
  };

  Fusion() = default;
  Fusion(ParamStore<T>& store, const ModelConfig& config, Rng& rng);

  /// Adds the sinusoidal encoding of history positions 0..k-1 and runs every
  /// block. When `cross_maps` is given it receives one map per block.
  Tensor<T> fuse(const Tensor<T>& history, const Tensor<T>& doc, const ForwardContext& ctx,
                 std::vector<AttentionMap>* cross_maps = nullptr,
                 std::vector<AttentionMap>* self_maps = nullptr) const;

  Tensor<T> block_step1(const Tensor<T>& state, std::size_t block, const ForwardContext& ctx,
                        AttentionMap* map = nullptr) const;
  Tensor<T> block_step2(const Tensor<T>& state, const Tensor<T>& doc, std::size_t block,
                        const ForwardContext& ctx, AttentionMap* map = nullptr) const;

  const std::vector<Block>& blocks() const { return blocks_; }

 private:
  std::size_t hidden_ = 0;
  std::vector<Block> blocks_;
};

}  // namespace ipc
