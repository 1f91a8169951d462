#pragma once

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "ipc/model.hpp"

namespace ipc {

/// Sigmoid probabilities [1 x (|C_k| + 1)] of level k from the last row of S_k.
/// Throws IndexError unless 1 <= k <= heads.size().
template <typename T>
Tensor<T> predict_level(const Tensor<T>& s_k, std::size_t k, std::span<const LevelHead<T>> heads);

/// Summed binary cross-entropy of level probabilities against binary targets.
template <typename T>
Tensor<T> level_loss(const Tensor<T>& probs, std::span<const T> targets);

struct LevelDecision {
  std::vector<LabelId> labels;
  bool stopped = false;
};

/// Thresholds one level: every slot i >= 1 with p >= tau is selected, slot 0
/// signals stop. With force_nonempty, a level that selects nothing and does
/// not stop gets the argmax label. With mask_children, labels whose parents
/// are all missing from `previous` are dropped (and the argmax is taken over
/// the remaining candidates).
LevelDecision decode(std::span<const double> probs, const DecodeConfig& cfg, std::size_t k,
                     const Taxonomy& tax, const std::vector<LabelId>* previous = nullptr);

struct PathPrediction {
  LabelPathSequence sequence;
  /// Set when decoding hit the depth bound without a stop.
  bool truncated = false;
  /// Given prefix length in levels below the root (0 when none).
  std::size_t given_levels = 0;
  /// Probabilities of every decoded level, in decode order.
  std::vector<std::vector<double>> probabilities;
  /// Per-level decisions, aligned with `probabilities`.
  std::vector<LevelDecision> decisions;
};

/// Greedy level-by-level inference. `given_prefix` holds L_0..L_{j-1} and
/// must start with {root}; decoding begins at level j.
template <typename T>
PathPrediction predict_paths(const Model<T>& model, const EncodedProposal& p,
                             const DecodeConfig& cfg,
                             const std::vector<std::vector<LabelId>>* given_prefix = nullptr,
                             ForwardTrace* trace = nullptr);

/// Log-probability of one level's decision under independent sigmoids:
/// sum over slots of log p for selected slots and log(1 - p) for the rest.
double decision_log_probability(std::span<const double> probs, const LevelDecision& d,
                                std::size_t k, const Taxonomy& tax);

/// Product and log-sum of the per-level decision probabilities of a prediction.
struct SequenceProbability {
  double product = 1.0;
  double log_sum = 0.0;
};
SequenceProbability sequence_probability(const PathPrediction& pred, const Taxonomy& tax);

/// One JSONL record: {id, levels, stopped_at, truncated, probabilities?}.
nlohmann::json prediction_to_json(const std::string& id, const PathPrediction& pred,
                                  const Taxonomy& tax, bool with_probabilities);

}  // namespace ipc
