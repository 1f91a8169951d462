#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipc/corpus.hpp"
#include "ipc/taxonomy.hpp"

namespace ipc {

/// Keyword set K_a and frequencies F_a of every discipline a, indexed by LabelId.
struct KeywordStats {
  std::vector<std::map<std::string, std::size_t>> frequency;
  /// Proposals without any keyword.
  std::size_t skipped = 0;

  std::size_t disciplines() const { return frequency.size(); }
  bool has(LabelId a) const { return a < frequency.size() && !frequency[a].empty(); }
};

enum class LevelPolicy {
  /// Every label of the gold path sequence, at every level.
  AllLevels,
  /// Only the gold codes themselves.
  GoldCodesOnly,
};

struct StatsOptions {
  LevelPolicy policy = LevelPolicy::AllLevels;
  /// ASCII case folding of keywords before matching.
  bool fold_case = false;
};

/// Counts each distinct keyword of a proposal once for every discipline the
/// proposal carries.
KeywordStats collect_stats(const std::vector<Proposal>& corpus, const Taxonomy& tax,
                           const StatsOptions& options = {});

/// Share of a's keyword mass that falls on keywords b also uses.
double penetration(LabelId a, LabelId b, const KeywordStats& stats);
/// 1 - |K_a ∩ K_b| / |K_a|.
double disparity(LabelId a, LabelId b, const KeywordStats& stats);

struct Edge {
  LabelId src = 0;
  LabelId dst = 0;
  double weight = 0.0;
  bool operator==(const Edge&) const = default;
};

/// Directed weighted discipline graph; nodes are all taxonomy labels.
class InterGraph {
 public:
  InterGraph() = default;
  InterGraph(std::size_t nodes, double alpha, double beta);

  std::size_t nodes() const { return out_.size(); }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  /// Throws ContractError for self-edges, negative weights or unknown nodes.
  void set_edge(LabelId src, LabelId dst, double weight);
  double weight(LabelId src, LabelId dst) const;
  const std::map<LabelId, double>& out_edges(LabelId src) const { return out_.at(src); }
  /// Nodes joined to `n` by an edge in either direction, ascending.
  std::vector<LabelId> neighbors(LabelId n) const;
  std::vector<Edge> edges() const;
  std::size_t edge_count() const;

  std::string to_tsv(const Taxonomy& tax) const;
  static InterGraph from_tsv(const std::string& text, const Taxonomy& tax);
  nlohmann::json to_json(const Taxonomy& tax) const;
  static InterGraph from_json(const nlohmann::json& doc, const Taxonomy& tax);
  /// Picks the format from the extension (.json or TSV otherwise).
  static InterGraph load(const std::filesystem::path& path, const Taxonomy& tax);

 private:
  std::vector<std::map<LabelId, double>> out_;
  std::vector<std::map<LabelId, double>> in_;
  double alpha_ = 1.0;
  double beta_ = 1.0;
};

struct GraphOptions {
  double alpha = 1.0;
  double beta = 1.0;
  /// Edges with weight <= threshold are dropped. Default keeps every positive edge.
  double threshold = 0.0;
};

/// e_{a->b} = p_{a->b}^alpha * d_{a->b}^beta over ordered pairs a != b that both have keywords.
InterGraph build_graph(const KeywordStats& stats, const GraphOptions& options = {});

/// Corpus-level diversity sum over a != b of (p_a p_b)^alpha d_ab^beta, with
/// p_a the share of keyword mass and d_ab the mean of both directed disparities.
double rao_stirling_diversity(const KeywordStats& stats, double alpha = 1.0, double beta = 1.0);

/// "%.17g" formatting, which round-trips doubles exactly.
std::string format_exact(double v);

}  // namespace ipc
