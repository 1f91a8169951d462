#include "ipc/model.hpp"

#include <algorithm>

namespace ipc {

template <typename T>
LevelHead<T>::LevelHead(ParamStore<T>& store, const std::string& name, std::size_t width,
                        std::size_t slots, Rng& rng)
    : hidden(store, name + ".hidden", width, width, rng), out(store, name + ".out", width, slots, rng) {}

template <typename T>
Model<T>::Model(const Config& config, Taxonomy taxonomy, InterGraph graph, Vocab vocab,
                std::uint64_t seed, const EmbeddingTable* embeddings)
    : config_(config),
      taxonomy_(std::move(taxonomy)),
      graph_(std::move(graph)),
      vocab_(std::move(vocab)),
      dropout_rng_(seed ^ 0x9e3779b97f4a7c15ULL) {
  config_.validate();
  if (graph_.nodes() != taxonomy_.size()) {
    throw ConfigError("graph has " + std::to_string(graph_.nodes()) + " nodes but the taxonomy has " +
                      std::to_string(taxonomy_.size()) + " labels");
  }
  const std::size_t h = config_.model.hidden;
  Rng rng(seed);
  if (embeddings) {
    if (embeddings->width != h || embeddings->values.size() != vocab_.size() * h) {
      throw ConfigError("embedding table is not |V| x h");
    }
    embedding_ = params_.add("embedding.word", {vocab_.size(), h});
    for (std::size_t i = 0; i < embeddings->values.size(); ++i) {
      embedding_.data()[i] = static_cast<T>(embeddings->values[i]);
    }
  } else {
    auto table = random_embeddings(vocab_, h, 1.0, rng);
    embedding_ = params_.add("embedding.word", {vocab_.size(), h});
    std::copy(table.values.begin(), table.values.end(), embedding_.data().begin());
  }
  std::fill_n(embedding_.data().begin(), h, T(0));
  embedding_.set_requires_grad(!config_.train.freeze_embeddings);

  sie_ = Sie<T>(params_, config_.model, rng);
  ike_ = Ike<T>(params_, config_.model, taxonomy_.size(), rng);
  ike_.bind(&graph_);
  fusion_ = Fusion<T>(params_, config_.model, rng);
  for (std::size_t k = 1; k <= taxonomy_.depth(); ++k) {
    heads_.emplace_back(params_, "head" + std::to_string(k), h, taxonomy_.level_size(k) + 1, rng);
  }
}

template <typename T>
ForwardContext Model<T>::context(bool train) {
  return ForwardContext{train, config_.model.dropout, &dropout_rng_};
}

template <typename T>
Tensor<T> Model<T>::encode(const EncodedProposal& p, const ForwardContext& ctx,
                           SieTrace* trace) const {
  std::array<Tensor<T>, kDocTypeCount> docs;
  std::array<std::size_t, kDocTypeCount> valid{};
  for (std::size_t t = 0; t < kDocTypeCount; ++t) {
    const auto& ids = p.documents[t].ids;
    if (ids.size() != config_.model.lengths[t]) {
      throw ConfigError("document " + std::string(kDocTypeNames[t]) + " was encoded with length " +
                        std::to_string(ids.size()) + ", model expects " +
                        std::to_string(config_.model.lengths[t]));
    }
    for (std::size_t id : ids) {
      if (id >= vocab_.size()) {
        throw LookupError("token id " + std::to_string(id) + " outside the vocabulary");
      }
    }
    docs[t] = take_rows(embedding_, std::span<const std::size_t>(ids));
    valid[t] = p.documents[t].length;
  }
  return sie_.encode(docs, valid, ctx, trace);
}

template <typename T>
Tensor<T> Model<T>::history_embedding(std::span<const std::vector<LabelId>> history) const {
  return ike_.embed_history(history, graph_);
}

template <typename T>
Tensor<T> Model<T>::level_logits(const Tensor<T>& doc, const Tensor<T>& history,
                                 const ForwardContext& ctx,
                                 std::vector<AttentionMap>* cross) const {
  const std::size_t k = history.rows();
  if (k == 0 || k > heads_.size()) {
    throw IndexError("level " + std::to_string(k) + " outside 1.." + std::to_string(heads_.size()));
  }
  const auto s = fusion_.fuse(history, doc, ctx, cross);
  const std::size_t last = k - 1;
  return heads_[k - 1](take_rows(s, std::span<const std::size_t>(&last, 1)));
}

template <typename T>
Tensor<T> Model<T>::teacher_forced_loss(const EncodedProposal& p, const ForwardContext& ctx) const {
  const auto& seq = p.gold;
  const std::size_t depth = seq.depth();
  if (depth == 0 || depth > heads_.size()) {
    throw ContractError("gold sequence of " + p.id + " has depth " + std::to_string(depth));
  }
  const auto doc = encode(p, ctx);
  // Gold prefixes only: E_{<k} is a prefix of E_{<H_A}.
  const auto history = history_embedding(std::span(seq.sets).first(depth));
  std::vector<Tensor<T>> terms;
  for (std::size_t k = 1; k <= depth; ++k) {
    std::vector<std::size_t> rows(k);
    for (std::size_t i = 0; i < k; ++i) {
      rows[i] = i;
    }
    const auto logits = level_logits(doc, take_rows(history, std::span<const std::size_t>(rows)), ctx);
    const auto targets = level_targets(seq, k, taxonomy_);
    const std::vector<T> t(targets.begin(), targets.end());
    terms.push_back(bce_with_logits(logits, std::span<const T>(t)));
  }
  return add_all<T>(terms);
}

template <typename T>
void Model<T>::mask_pad_gradient() {
  if (!embedding_.requires_grad()) {
    return;
  }
  auto g = embedding_.grad();
  std::fill_n(g.begin(), config_.model.hidden, T(0));
}

template struct LevelHead<float>;
template struct LevelHead<double>;
template class Model<float>;
template class Model<double>;

}  // namespace ipc
