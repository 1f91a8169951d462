#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ipc/corpus.hpp"
#include "ipc/taxonomy.hpp"

namespace oracle {

using ipc::DocType;
using ipc::LabelId;
using ipc::Proposal;
using ipc::Taxonomy;

/// Keyword -> count per label id, counting each keyword once per proposal,
/// for every label on the proposal's ancestor chains.
inline std::map<LabelId, std::map<std::string, double>> brute_counts(const std::vector<Proposal>& corpus,
                                                              const Taxonomy& t) {
  std::map<LabelId, std::map<std::string, double>> f;
  for (const auto& p : corpus) {
    std::set<LabelId> labels;
    for (const auto& code : p.gold_codes) {
      for (LabelId a = 1; a < t.size(); ++a) {
        if (a == t.id(code) || t.precedes(a, t.id(code))) {
          labels.insert(a);
        }
      }
    }
    const auto& kw = p.documents[static_cast<std::size_t>(DocType::Keywords)].tokens;
    const std::set<std::string> distinct(kw.begin(), kw.end());
    for (LabelId a : labels) {
      for (const auto& k : distinct) {
        f[a][k] += 1.0;
      }
    }
  }
  return f;
}

inline double brute_edge(const std::map<std::string, double>& fa, const std::map<std::string, double>& fb) {
  double shared_mass = 0.0, mass = 0.0, shared = 0.0;
  for (const auto& [k, c] : fa) {
    mass += c;
    if (fb.count(k)) {
      shared_mass += c;
      shared += 1.0;
    }
  }
  const double p = shared_mass / mass;
  const double d = 1.0 - shared / static_cast<double>(fa.size());
  return p * d;
}

}  // namespace oracle
