#include "ipc/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "ipc/errors.hpp"

namespace ipc {

void ConfusionCounts::add(const std::vector<LabelId>& predicted, const std::vector<LabelId>& gold) {
  const std::set<LabelId> p(predicted.begin(), predicted.end());
  const std::set<LabelId> g(gold.begin(), gold.end());
  for (LabelId l : p) {
    auto& c = labels[l];
    (g.count(l) ? c.tp : c.fp) += 1;
  }
  for (LabelId l : g) {
    if (!p.count(l)) {
      labels[l].fn += 1;
    }
  }
}

LabelCounts ConfusionCounts::pooled() const {
  LabelCounts total;
  for (const auto& [_, c] : labels) {
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
  }
  return total;
}

double f1_score(const LabelCounts& c) {
  const double p = c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double r = c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

double micro_f1(const ConfusionCounts& counts) { return f1_score(counts.pooled()); }

double macro_f1(const ConfusionCounts& counts, const std::vector<LabelId>* universe) {
  double total = 0.0;
  std::size_t n = 0;
  if (universe) {
    for (LabelId l : *universe) {
      auto it = counts.labels.find(l);
      total += it == counts.labels.end() ? 0.0 : f1_score(it->second);
      ++n;
    }
  } else {
    for (const auto& [_, c] : counts.labels) {
      if (c.tp + c.fp + c.fn > 0) {
        total += f1_score(c);
        ++n;
      }
    }
  }
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

std::vector<LabelId> flatten(const LabelPathSequence& seq) {
  std::vector<LabelId> out;
  for (std::size_t k = 1; k < seq.sets.size(); ++k) {
    out.insert(out.end(), seq.sets[k].begin(), seq.sets[k].end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<ScoredPair> align(const std::vector<IdSequence>& predicted,
                              const std::vector<IdSequence>& gold) {
  std::map<std::string, const LabelPathSequence*> by_id;
  for (const auto& [id, seq] : predicted) {
    if (!by_id.emplace(id, &seq).second) {
      throw ContractError("duplicate prediction for " + id);
    }
  }
  std::vector<ScoredPair> out;
  std::set<std::string> seen;
  for (const auto& [id, seq] : gold) {
    if (!seen.insert(id).second) {
      throw ContractError("duplicate gold record " + id);
    }
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw ContractError("no prediction for " + id);
    }
    out.push_back({id, *it->second, seq});
  }
  if (out.size() != by_id.size()) {
    for (const auto& [id, _] : by_id) {
      if (!seen.count(id)) {
        throw ContractError("prediction " + id + " has no gold record");
      }
    }
  }
  return out;
}

ConfusionCounts flat_counts(const std::vector<ScoredPair>& pairs) {
  ConfusionCounts counts;
  for (const auto& p : pairs) {
    counts.add(flatten(p.predicted), flatten(p.gold));
  }
  return counts;
}

namespace {

const std::vector<LabelId>& level_set(const LabelPathSequence& seq, std::size_t k) {
  static const std::vector<LabelId> empty;
  return k < seq.sets.size() ? seq.sets[k] : empty;
}

}  // namespace

Report evaluate(const std::vector<ScoredPair>& pairs, const Taxonomy& tax,
                bool macro_includes_unseen) {
  Report r;
  r.proposals = pairs.size();
  std::vector<LabelId> all;
  std::vector<ConfusionCounts> per_level(tax.depth() + 1);
  ConfusionCounts flat;
  for (const auto& p : pairs) {
    flat.add(flatten(p.predicted), flatten(p.gold));
    for (std::size_t k = 1; k <= tax.depth(); ++k) {
      per_level[k].add(level_set(p.predicted, k), level_set(p.gold, k));
    }
  }
  for (LabelId l = 1; l < tax.size(); ++l) {
    all.push_back(l);
  }
  r.micro = micro_f1(flat);
  r.macro = macro_f1(flat, macro_includes_unseen ? &all : nullptr);
  for (std::size_t k = 1; k <= tax.depth(); ++k) {
    std::vector<LabelId> level_labels;
    for (std::size_t i = 0; i < tax.level_size(k); ++i) {
      level_labels.push_back(tax.level_offset(k) + i);
    }
    LevelScore s;
    s.level = k;
    s.micro = micro_f1(per_level[k]);
    s.macro = macro_f1(per_level[k], macro_includes_unseen ? &level_labels : nullptr);
    const auto pooled = per_level[k].pooled();
    s.support = pooled.tp + pooled.fn;
    r.levels.push_back(s);
  }
  return r;
}

nlohmann::json report_to_json(const Report& r) {
  nlohmann::json j;
  j["micro_f1"] = r.micro;
  j["macro_f1"] = r.macro;
  j["proposals"] = r.proposals;
  auto levels = nlohmann::json::array();
  for (const auto& s : r.levels) {
    levels.push_back(
        {{"level", s.level}, {"micro_f1", s.micro}, {"macro_f1", s.macro}, {"support", s.support}});
  }
  j["levels"] = levels;
  return j;
}

std::string report_to_text(const Report& r) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof line, "%-8s %8s %8s %8s\n", "level", "MiF1", "MaF1", "support");
  out += line;
  for (const auto& s : r.levels) {
    std::snprintf(line, sizeof line, "%-8zu %8.4f %8.4f %8zu\n", s.level, s.micro, s.macro, s.support);
    out += line;
  }
  std::snprintf(line, sizeof line, "%-8s %8.4f %8.4f %8zu\n", "all", r.micro, r.macro, r.proposals);
  out += line;
  return out;
}

}  // namespace ipc
