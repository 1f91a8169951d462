#pragma once

#include <array>
#include <span>
#include <vector>

#include "ipc/config.hpp"
#include "ipc/corpus.hpp"
#include "ipc/nn.hpp"

namespace ipc {

/// Attention maps captured during one encode, per SIE layer.
struct SieTrace {
  std::vector<std::array<AttentionMap, kDocTypeCount>> word;
  std::vector<AttentionMap> doc;
};

/// Semantic information extractor: a word-level transformer over every
/// document, a per-type vectorize+FC fusion with the document's type token,
/// and a document-level transformer over the |T| fused vectors. The word
/// stream and the type-token stream run in parallel across layers; the
/// document-level output of layer l supplies the type tokens of layer l + 1.
template <typename T>
class Sie {
 public:
  struct Layer {
    TransformerBlock<T> word;
    std::array<Linear<T>, kDocTypeCount> fuse_fc;
    TransformerBlock<T> doc;
  };

  Sie() = default;
  Sie(ParamStore<T>& store, const ModelConfig& config, Rng& rng);

  /// `docs[i]` holds the looked-up word embeddings of document i, shaped
  /// [lengths[i] x h]; `valid[i]` counts its non-PAD prefix. Returns [|T| x h].
  Tensor<T> encode(std::span<const Tensor<T>> docs, std::span<const std::size_t> valid,
                   const ForwardContext& ctx, SieTrace* trace = nullptr) const;

  Tensor<T> word_level_layer(const Tensor<T>& words, std::size_t layer, std::size_t valid,
                             const ForwardContext& ctx, AttentionMap* map = nullptr) const;
  /// Flattens the word matrix (PAD rows zeroed), projects it to h and adds the type token.
  Tensor<T> doc_fuse(const Tensor<T>& type_token, const Tensor<T>& words, std::size_t valid,
                     const Linear<T>& fc) const;
  Tensor<T> doc_level_layer(const Tensor<T>& fused, std::size_t layer, const ForwardContext& ctx,
                            AttentionMap* map = nullptr) const;

  const std::vector<Layer>& layers() const { return layers_; }
  const Tensor<T>& type_tokens() const { return type_tokens_; }
  std::size_t hidden() const { return hidden_; }

 private:
  std::size_t hidden_ = 0;
  DocLengths lengths_{};
  Tensor<T> type_tokens_;
  std::vector<Layer> layers_;
};

}  // namespace ipc
