#include "ipc/ike.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ipc {

Subgraph sample_subgraph(std::span<const LabelId> centers, const InterGraph& graph,
                         std::size_t hops, AdjacencyMode mode) {
  if (centers.empty()) {
    throw ContractError("subgraph sampling needs at least one center");
  }
  Subgraph sub;
  std::set<LabelId> seen;
  for (LabelId c : centers) {
    if (c >= graph.nodes()) {
      throw LookupError("label " + std::to_string(c) + " is not a node of the graph");
    }
    if (seen.insert(c).second) {
      sub.nodes.push_back(c);
    }
  }
  sub.centers = sub.nodes.size();
  std::vector<LabelId> frontier = sub.nodes;
  for (std::size_t hop = 0; hop < hops && !frontier.empty(); ++hop) {
    std::set<LabelId> next;
    for (LabelId n : frontier) {
      for (LabelId m : graph.neighbors(n)) {
        if (!seen.count(m)) {
          next.insert(m);
        }
      }
    }
    frontier.assign(next.begin(), next.end());
    for (LabelId m : frontier) {
      seen.insert(m);
      sub.nodes.push_back(m);
    }
  }
  const std::size_t n = sub.nodes.size();
  sub.adjacency.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        continue;
      }
      const double ab = graph.weight(sub.nodes[i], sub.nodes[j]);
      const double ba = graph.weight(sub.nodes[j], sub.nodes[i]);
      switch (mode) {
        case AdjacencyMode::Mean:
          sub.adjacency[i * n + j] = 0.5 * (ab + ba);
          break;
        case AdjacencyMode::Max:
          sub.adjacency[i * n + j] = std::max(ab, ba);
          break;
        case AdjacencyMode::Out:
          sub.adjacency[i * n + j] = ab;
          break;
      }
    }
  }
  return sub;
}

std::vector<double> normalized_adjacency(const std::vector<double>& adjacency, std::size_t n) {
  if (adjacency.size() != n * n) {
    throw DimensionError("adjacency is not n x n");
  }
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (adjacency[i * n + j] < 0.0) {
        throw ContractError("adjacency weights must be nonnegative");
      }
      degree += adjacency[i * n + j];
    }
    inv_sqrt[i] = 1.0 / std::sqrt(degree);
  }
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = adjacency[i * n + j] + (i == j ? 1.0 : 0.0);
      out[i * n + j] = inv_sqrt[i] * a * inv_sqrt[j];
    }
  }
  return out;
}

template <typename T>
Tensor<T> gcn_layer(const Tensor<T>& adj_norm, const Tensor<T>& features, const Tensor<T>& weight) {
  return relu(matmul(matmul(adj_norm, features), weight));
}

template <typename T>
Ike<T>::Ike(ParamStore<T>& store, const ModelConfig& config, std::size_t nodes, Rng& rng)
    : mode_(config.adjacency) {
  features_ = store.add_normal("ike.features", {nodes, config.hidden}, 1.0, rng);
  for (std::size_t l = 0; l < config.gcn_layers; ++l) {
    weights_.push_back(store.add_xavier("ike.gcn" + std::to_string(l) + ".weight", config.hidden,
                                        config.hidden, rng));
  }
}

template <typename T>
void Ike<T>::bind(const InterGraph* graph) {
  bound_ = graph;
  cache_.clear();
}

template <typename T>
typename Ike<T>::Sampled Ike<T>::sample(std::span<const LabelId> labels,
                                         const InterGraph& graph) const {
  const auto sub = sample_subgraph(labels, graph, weights_.size(), mode_);
  const std::size_t n = sub.nodes.size();
  const auto norm = normalized_adjacency(sub.adjacency, n);
  Sampled s;
  s.nodes.assign(sub.nodes.begin(), sub.nodes.end());
  s.centers = sub.centers;
  s.adj_norm = Tensor<T>::from({n, n}, std::vector<T>(norm.begin(), norm.end()));
  return s;
}

template <typename T>
const typename Ike<T>::Sampled& Ike<T>::sampled(std::span<const LabelId> labels,
                                                const InterGraph& graph, Sampled& scratch) const {
  if (&graph != bound_) {
    scratch = sample(labels, graph);
    return scratch;
  }
  std::vector<LabelId> key(labels.begin(), labels.end());
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_.emplace(std::move(key), sample(labels, graph)).first;
  }
  return it->second;
}

template <typename T>
Tensor<T> Ike<T>::embed_level(std::span<const LabelId> labels, const InterGraph& graph) const {
  if (labels.empty()) {
    throw ContractError("cannot embed an empty label set");
  }
  if (graph.nodes() != features_.shape()[0]) {
    throw ConfigError("graph has " + std::to_string(graph.nodes()) + " nodes, IKE was built for " +
                      std::to_string(features_.shape()[0]));
  }
  Sampled scratch;
  const Sampled& s = sampled(labels, graph, scratch);
  Tensor<T> h = take_rows(features_, std::span<const std::size_t>(s.nodes));
  for (const auto& w : weights_) {
    h = gcn_layer(s.adj_norm, h, w);
  }
  std::vector<std::size_t> centers(s.centers);
  for (std::size_t i = 0; i < s.centers; ++i) {
    centers[i] = i;
  }
  return mean_rows(take_rows(h, std::span<const std::size_t>(centers)));
}

template <typename T>
Tensor<T> Ike<T>::embed_history(std::span<const std::vector<LabelId>> history,
                                const InterGraph& graph) const {
  if (history.empty()) {
    throw ContractError("history must contain at least {root}");
  }
  std::vector<Tensor<T>> rows;
  rows.reserve(history.size());
  for (const auto& set : history) {
    rows.push_back(embed_level(set, graph));
  }
  return concat_rows<T>(rows);
}

template Tensor<float> gcn_layer(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&);
template Tensor<double> gcn_layer(const Tensor<double>&, const Tensor<double>&,
                                  const Tensor<double>&);
template class Ike<float>;
template class Ike<double>;

}  // namespace ipc
