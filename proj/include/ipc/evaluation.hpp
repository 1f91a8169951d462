#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipc/taxonomy.hpp"

namespace ipc {

struct LabelCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// Per-label true positives, false positives and false negatives.
struct ConfusionCounts {
  std::map<LabelId, LabelCounts> labels;

  /// Adds one proposal's predicted and gold label sets.
  void add(const std::vector<LabelId>& predicted, const std::vector<LabelId>& gold);
  LabelCounts pooled() const;
};

/// 2PR / (P + R), 0 when P + R = 0.
double f1_score(const LabelCounts& c);
double micro_f1(const ConfusionCounts& counts);
/// Unweighted mean of per-label F1. Labels never predicted nor gold are left
/// out unless `universe` is given, in which case every listed label counts.
double macro_f1(const ConfusionCounts& counts, const std::vector<LabelId>* universe = nullptr);

/// Every label of levels >= 1, sorted. The root and the stop flag are never scored.
std::vector<LabelId> flatten(const LabelPathSequence& seq);

struct ScoredPair {
  std::string id;
  LabelPathSequence predicted;
  LabelPathSequence gold;
};

using IdSequence = std::pair<std::string, LabelPathSequence>;

/// Pairs predictions with gold sequences by id, in gold order. Throws
/// ContractError when either side has an id the other lacks, or a duplicate.
std::vector<ScoredPair> align(const std::vector<IdSequence>& predicted,
                              const std::vector<IdSequence>& gold);

ConfusionCounts flat_counts(const std::vector<ScoredPair>& pairs);

struct LevelScore {
  std::size_t level = 0;
  double micro = 0.0;
  double macro = 0.0;
  std::size_t support = 0;
};

struct Report {
  double micro = 0.0;
  double macro = 0.0;
  std::size_t proposals = 0;
  std::vector<LevelScore> levels;
};

/// Flattened and per-level scores. A level missing from either sequence
/// counts as an empty set.
Report evaluate(const std::vector<ScoredPair>& pairs, const Taxonomy& tax,
                bool macro_includes_unseen = false);

nlohmann::json report_to_json(const Report& r);
/// Aligned text table.
std::string report_to_text(const Report& r);

}  // namespace ipc
