#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ipc/config.hpp"
#include "ipc/corpus.hpp"
#include "ipc/fusion.hpp"
#include "ipc/graph.hpp"
#include "ipc/ike.hpp"
#include "ipc/sie.hpp"
#include "ipc/taxonomy.hpp"

namespace ipc {

/// Level-specific head: Linear(h, h) -> ReLU -> Linear(h, |C_k| + 1). Output
/// slot 0 is the stop label.
template <typename T>
struct LevelHead {
  Linear<T> hidden;
  Linear<T> out;

  LevelHead() = default;
  LevelHead(ParamStore<T>& store, const std::string& name, std::size_t width, std::size_t slots,
            Rng& rng);
  /// Logits [1 x slots] from a pooled row [1 x h].
  Tensor<T> operator()(const Tensor<T>& pooled) const { return out(relu(hidden(pooled))); }
  std::size_t slots() const { return out.out_features(); }
};

/// Everything one forward pass needs to report back for diagnostics.
struct ForwardTrace {
  SieTrace sie;
  /// Fusion cross-attention maps per decoded level, one per block.
  std::vector<std::vector<AttentionMap>> cross;
};

/// The full network with its own copies of the taxonomy, graph and
/// vocabulary, so a checkpoint alone can rebuild it.
template <typename T>
class Model {
 public:
  /// Parameters are drawn from `seed`. Without `embeddings` the word table is
  /// initialized N(0, 1) with a zero PAD row.
  Model(const Config& config, Taxonomy taxonomy, InterGraph graph, Vocab vocab, std::uint64_t seed,
        const EmbeddingTable* embeddings = nullptr);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const Config& config() const { return config_; }
  const Taxonomy& taxonomy() const { return taxonomy_; }
  const InterGraph& graph() const { return graph_; }
  const Vocab& vocab() const { return vocab_; }
  ParamStore<T>& params() { return params_; }
  const ParamStore<T>& params() const { return params_; }
  const Sie<T>& sie() const { return sie_; }
  const Ike<T>& ike() const { return ike_; }
  const Fusion<T>& fusion() const { return fusion_; }
  std::span<const LevelHead<T>> heads() const { return heads_; }
  const Tensor<T>& embedding() const { return embedding_; }

  /// Dropout is active only when `train` is set.
  ForwardContext context(bool train);

  /// Looks up the word embeddings and runs SIE: D [|T| x h].
  Tensor<T> encode(const EncodedProposal& p, const ForwardContext& ctx,
                   SieTrace* trace = nullptr) const;
  /// E_{<k} for the first k sets of `history`.
  Tensor<T> history_embedding(std::span<const std::vector<LabelId>> history) const;
  /// Head logits for level k = history.rows(), from S_k's last row.
  Tensor<T> level_logits(const Tensor<T>& doc, const Tensor<T>& history, const ForwardContext& ctx,
                         std::vector<AttentionMap>* cross = nullptr) const;

  /// Summed teacher-forced BCE over levels 1..H_A of the gold sequence.
  Tensor<T> teacher_forced_loss(const EncodedProposal& p, const ForwardContext& ctx) const;

  /// Zeroes the PAD row gradient so the row stays at zero.
  void mask_pad_gradient();

  /// Counts decode steps that fed predicted labels back into the history.
  std::size_t predicted_history_uses() const { return predicted_history_uses_; }
  void note_predicted_history() const { ++predicted_history_uses_; }

 private:
  Config config_;
  Taxonomy taxonomy_;
  InterGraph graph_;
  Vocab vocab_;
  ParamStore<T> params_;
  Tensor<T> embedding_;
  Sie<T> sie_;
  Ike<T> ike_;
  Fusion<T> fusion_;
  std::vector<LevelHead<T>> heads_;
  Rng dropout_rng_;
  mutable std::size_t predicted_history_uses_ = 0;
};

}  // namespace ipc
