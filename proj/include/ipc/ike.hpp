#pragma once

#include <map>
#include <span>
#include <vector>

#include "ipc/config.hpp"
#include "ipc/graph.hpp"
#include "ipc/nn.hpp"
#include "ipc/taxonomy.hpp"

namespace ipc {

/// Induced neighbourhood of a label set. The centers come first, in the
/// order given; the remaining nodes follow in BFS order, ascending label id
/// within each hop.
struct Subgraph {
  std::vector<LabelId> nodes;
  std::size_t centers = 0;
  /// Weights among `nodes`, row-major n x n, zero diagonal. Symmetric unless
  /// the mode is Out.
  std::vector<double> adjacency;
};

/// BFS over edges in either direction, up to `hops` hops from the centers.
/// Throws LookupError when a center is not a graph node and ContractError for
/// an empty center set.
Subgraph sample_subgraph(std::span<const LabelId> centers, const InterGraph& graph,
                         std::size_t hops, AdjacencyMode mode = AdjacencyMode::Mean);

/// D^-1/2 (A + I) D^-1/2 with D the row sums of A + I, row-major n x n.
std::vector<double> normalized_adjacency(const std::vector<double>& adjacency, std::size_t n);

/// relu(adj_norm * H * W).
template <typename T>
Tensor<T> gcn_layer(const Tensor<T>& adj_norm, const Tensor<T>& features, const Tensor<T>& weight);

/// Interdisciplinary knowledge extractor: GCN over the sampled neighbourhood
/// of each history level, mean readout of the center rows.
template <typename T>
class Ike {
 public:
  Ike() = default;
  Ike(ParamStore<T>& store, const ModelConfig& config, std::size_t nodes, Rng& rng);

  /// Subgraphs sampled from the bound graph are cached per label set. The
  /// graph must outlive this object or be unbound first.
  void bind(const InterGraph* graph);

  /// One vector [1 x h] for a non-empty label set.
  Tensor<T> embed_level(std::span<const LabelId> labels, const InterGraph& graph) const;
  /// Rows e_0..e_{k-1} for the sets L_0..L_{k-1}, shaped [k x h].
  Tensor<T> embed_history(std::span<const std::vector<LabelId>> history,
                          const InterGraph& graph) const;

  const Tensor<T>& features() const { return features_; }
  const std::vector<Tensor<T>>& weights() const { return weights_; }

 private:
  struct Sampled {
    std::vector<std::size_t> nodes;
    std::size_t centers = 0;
    Tensor<T> adj_norm;
  };
  Sampled sample(std::span<const LabelId> labels, const InterGraph& graph) const;
  const Sampled& sampled(std::span<const LabelId> labels, const InterGraph& graph,
                        Sampled& scratch) const;

  Tensor<T> features_;
  std::vector<Tensor<T>> weights_;
  AdjacencyMode mode_ = AdjacencyMode::Mean;
  const InterGraph* bound_ = nullptr;
  mutable std::map<std::vector<LabelId>, Sampled> cache_;
};

}  // namespace ipc
