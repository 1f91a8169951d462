#include "ipc/predictor.hpp"

#include <algorithm>
#include <cmath>

namespace ipc {

template <typename T>
Tensor<T> predict_level(const Tensor<T>& s_k, std::size_t k, std::span<const LevelHead<T>> heads) {
  if (k == 0 || k > heads.size()) {
    throw IndexError("level " + std::to_string(k) + " outside 1.." + std::to_string(heads.size()));
  }
  if (s_k.rank() != 2 || s_k.rows() == 0) {
    throw DimensionError("S_k must be a non-empty matrix, got " + shape_str(s_k.shape()));
  }
  const std::size_t last = s_k.rows() - 1;
  return sigmoid(heads[k - 1](take_rows(s_k, std::span<const std::size_t>(&last, 1))));
}

template <typename T>
Tensor<T> level_loss(const Tensor<T>& probs, std::span<const T> targets) {
  return bce(probs, targets);
}

LevelDecision decode(std::span<const double> probs, const DecodeConfig& cfg, std::size_t k,
                     const Taxonomy& tax, const std::vector<LabelId>* previous) {
  if (k == 0 || k > tax.depth()) {
    throw IndexError("level " + std::to_string(k) + " outside 1.." + std::to_string(tax.depth()));
  }
  const std::size_t n = tax.level_size(k);
  if (probs.size() != n + 1) {
    throw DimensionError("level " + std::to_string(k) + " expects " + std::to_string(n + 1) +
                         " probabilities, got " + std::to_string(probs.size()));
  }
  const LabelId offset = tax.level_offset(k);
  auto allowed = [&](std::size_t i) {
    if (!cfg.mask_children || !previous) {
      return true;
    }
    const auto& ps = tax.parents(offset + i);
    return std::any_of(ps.begin(), ps.end(), [&](LabelId p) {
      return std::binary_search(previous->begin(), previous->end(), p);
    });
  };
  LevelDecision d;
  d.stopped = probs[0] >= cfg.threshold;
  for (std::size_t i = 0; i < n; ++i) {
    if (probs[i + 1] >= cfg.threshold && allowed(i)) {
      d.labels.push_back(offset + i);
    }
  }
  if (d.labels.empty() && !d.stopped && cfg.force_nonempty) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < n; ++i) {
      if (allowed(i) && (!best || probs[i + 1] > probs[*best + 1])) {
        best = i;
      }
    }
    if (best) {
      d.labels.push_back(offset + *best);
    }
  }
  return d;
}

template <typename T>
PathPrediction predict_paths(const Model<T>& model, const EncodedProposal& p,
                             const DecodeConfig& cfg,
                             const std::vector<std::vector<LabelId>>* given_prefix,
                             ForwardTrace* trace) {
  const Taxonomy& tax = model.taxonomy();
  const std::size_t depth = tax.depth();
  const std::size_t max_depth = cfg.max_depth == 0 ? depth : std::min(cfg.max_depth, depth);
  PathPrediction out;
  auto& sets = out.sequence.sets;
  if (given_prefix && !given_prefix->empty()) {
    LabelPathSequence prefix{*given_prefix, std::nullopt};
    for (auto& s : prefix.sets) {
      std::sort(s.begin(), s.end());
    }
    check_path_sequence(prefix, tax, false);
    if (prefix.depth() > depth) {
      throw ContractError("given prefix is deeper than the taxonomy");
    }
    for (std::size_t k = 1; k < prefix.sets.size(); ++k) {
      if (prefix.sets[k].empty()) {
        throw ContractError("given prefix has an empty set at level " + std::to_string(k));
      }
    }
    sets = prefix.sets;
    out.given_levels = prefix.depth();
  } else {
    sets = {{tax.root()}};
  }
  if (sets.size() > depth) {
    // Nothing deeper exists; the prefix is the whole answer.
    out.sequence.stop_at = depth;
    return out;
  }

  NoGradGuard no_grad;
  const ForwardContext ctx{};
  const auto doc = model.encode(p, ctx, trace ? &trace->sie : nullptr);
  for (std::size_t k = sets.size(); k <= max_depth; ++k) {
    if (k > out.given_levels + 1) {
      model.note_predicted_history();
    }
    const auto history = model.history_embedding(sets);
    std::vector<AttentionMap>* cross = nullptr;
    if (trace) {
      cross = &trace->cross.emplace_back();
    }
    const auto probs_t = sigmoid(model.level_logits(doc, history, ctx, cross));
    std::vector<double> probs(probs_t.data().begin(), probs_t.data().end());
    auto d = decode(probs, cfg, k, tax, &sets.back());
    out.probabilities.push_back(probs);
    out.decisions.push_back(d);
    if (!d.labels.empty()) {
      sets.push_back(d.labels);
    }
    if (d.stopped || d.labels.empty()) {
      out.sequence.stop_at = sets.size() - 1;
      return out;
    }
  }
  out.truncated = true;
  return out;
}

double decision_log_probability(std::span<const double> probs, const LevelDecision& d,
                                std::size_t k, const Taxonomy& tax) {
  const LabelId offset = tax.level_offset(k);
  std::vector<bool> chosen(probs.size(), false);
  chosen[0] = d.stopped;
  for (LabelId l : d.labels) {
    chosen.at(l - offset + 1) = true;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    total += std::log(chosen[i] ? probs[i] : 1.0 - probs[i]);
  }
  return total;
}

SequenceProbability sequence_probability(const PathPrediction& pred, const Taxonomy& tax) {
  SequenceProbability out;
  const std::size_t first = pred.given_levels + 1;
  for (std::size_t i = 0; i < pred.decisions.size(); ++i) {
    const double lp = decision_log_probability(pred.probabilities[i], pred.decisions[i], first + i, tax);
    out.log_sum += lp;
    out.product *= std::exp(lp);
  }
  return out;
}

nlohmann::json prediction_to_json(const std::string& id, const PathPrediction& pred,
                                  const Taxonomy& tax, bool with_probabilities) {
  nlohmann::json rec;
  rec["id"] = id;
  auto levels = sequence_codes(pred.sequence, tax);
  if (!levels.empty()) {
    levels.erase(levels.begin());
  }
  rec["levels"] = levels;
  rec["stopped_at"] = pred.sequence.stop_at ? nlohmann::json(*pred.sequence.stop_at) : nlohmann::json();
  rec["truncated"] = pred.truncated;
  if (with_probabilities) {
    rec["probabilities"] = pred.probabilities;
  }
  return rec;
}

template Tensor<float> predict_level(const Tensor<float>&, std::size_t,
                                     std::span<const LevelHead<float>>);
template Tensor<double> predict_level(const Tensor<double>&, std::size_t,
                                      std::span<const LevelHead<double>>);
template Tensor<float> level_loss(const Tensor<float>&, std::span<const float>);
template Tensor<double> level_loss(const Tensor<double>&, std::span<const double>);
template PathPrediction predict_paths(const Model<float>&, const EncodedProposal&,
                                      const DecodeConfig&, const std::vector<std::vector<LabelId>>*,
                                      ForwardTrace*);
template PathPrediction predict_paths(const Model<double>&, const EncodedProposal&,
                                      const DecodeConfig&, const std::vector<std::vector<LabelId>>*,
                                      ForwardTrace*);

}  // namespace ipc
