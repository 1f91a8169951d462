#include "ipc/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "ipc/errors.hpp"

namespace ipc {

std::string Violation::message() const {
  std::string out = axiom + ": " + first;
  if (!second.empty()) {
    out += " / " + second;
  }
  return out;
}

std::optional<Violation> validate(std::span<const LabelSpec> labels) {
  std::map<std::string, std::size_t> level_of;
  std::string root;
  std::size_t deepest = 0;
  for (const auto& l : labels) {
    auto [it, fresh] = level_of.emplace(l.code, l.level);
    if (!fresh) {
      if (it->second != l.level) {
        return Violation{"unique level", l.code,
                         "levels " + std::to_string(it->second) + " and " + std::to_string(l.level)};
      }
      return Violation{"unique code", l.code, ""};
    }
    if (l.level == 0) {
      if (!root.empty()) {
        return Violation{"single root", root, l.code};
      }
      root = l.code;
    }
    deepest = std::max(deepest, l.level);
  }
  if (root.empty()) {
    return Violation{"single root", "no level-0 label", ""};
  }
  std::vector<bool> seen(deepest + 1, false);
  for (const auto& l : labels) {
    seen[l.level] = true;
    if (l.level == 0) {
      if (!l.parents.empty()) {
        return Violation{"single root", l.code, "root cannot have parents"};
      }
      continue;
    }
    if (l.parents.empty()) {
      return Violation{"parent required", l.code, ""};
    }
    for (const auto& p : l.parents) {
      auto it = level_of.find(p);
      if (it == level_of.end()) {
        return Violation{"unknown parent", l.code, p};
      }
      if (it->second + 1 != l.level) {
        return Violation{"level order", l.code, p};
      }
    }
  }
  for (std::size_t k = 0; k <= deepest; ++k) {
    if (!seen[k]) {
      return Violation{"contiguous levels", "level " + std::to_string(k) + " is empty", ""};
    }
  }
  if (deepest == 0) {
    return Violation{"contiguous levels", "taxonomy has no level below the root", ""};
  }
  return std::nullopt;
}

Taxonomy Taxonomy::build(std::span<const LabelSpec> labels) {
  if (auto v = validate(labels)) {
    throw ConfigError("invalid taxonomy, " + v->message());
  }
  std::size_t deepest = 0;
  for (const auto& l : labels) {
    deepest = std::max(deepest, l.level);
  }
  Taxonomy t;
  t.level_offsets_.assign(deepest + 2, 0);
  for (std::size_t k = 0; k <= deepest; ++k) {
    t.level_offsets_[k] = t.codes_.size();
    for (const auto& l : labels) {
      if (l.level == k) {
        t.by_code_.emplace(l.code, t.codes_.size());
        t.codes_.push_back(l.code);
        t.levels_.push_back(k);
      }
    }
  }
  t.level_offsets_[deepest + 1] = t.codes_.size();
  t.parents_.resize(t.codes_.size());
  t.children_.resize(t.codes_.size());
  for (const auto& l : labels) {
    const LabelId child = t.by_code_.at(l.code);
    for (const auto& p : l.parents) {
      const LabelId parent = t.by_code_.at(p);
      t.parents_[child].push_back(parent);
      t.children_[parent].push_back(child);
    }
  }
  for (auto& v : t.parents_) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  for (auto& v : t.children_) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return t;
}

Taxonomy Taxonomy::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("labels") || !doc["labels"].is_array()) {
    throw ParseError("taxonomy JSON needs a \"labels\" array");
  }
  std::vector<LabelSpec> specs;
  for (const auto& item : doc["labels"]) {
    try {
      LabelSpec s;
      s.code = item.at("code").get<std::string>();
      s.level = item.at("level").get<std::size_t>();
      if (item.contains("parents")) {
        s.parents = item["parents"].get<std::vector<std::string>>();
      }
      specs.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad taxonomy label entry: ") + e.what());
    }
  }
  return build(specs);
}

Taxonomy Taxonomy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open taxonomy file " + path.string());
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("taxonomy file " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

nlohmann::json Taxonomy::to_json() const {
  nlohmann::json labels = nlohmann::json::array();
  for (LabelId id = 0; id < size(); ++id) {
    std::vector<std::string> ps;
    for (LabelId p : parents_[id]) {
      ps.push_back(codes_[p]);
    }
    labels.push_back({{"id", id}, {"code", codes_[id]}, {"level", levels_[id]}, {"parents", ps}});
  }
  return {{"labels", labels}};
}

std::size_t Taxonomy::level_size(std::size_t k) const {
  if (k > depth()) {
    throw IndexError("level " + std::to_string(k) + " exceeds taxonomy depth " +
                     std::to_string(depth()));
  }
  return level_offsets_[k + 1] - level_offsets_[k];
}

LabelId Taxonomy::level_offset(std::size_t k) const {
  if (k > depth()) {
    throw IndexError("level " + std::to_string(k) + " exceeds taxonomy depth " +
                     std::to_string(depth()));
  }
  return level_offsets_[k];
}

std::optional<LabelId> Taxonomy::find(const std::string& code) const {
  auto it = by_code_.find(code);
  if (it == by_code_.end()) {
    return std::nullopt;
  }
  return it->second;
}

LabelId Taxonomy::id(const std::string& code) const {
  if (auto found = find(code)) {
    return *found;
  }
  throw LookupError("unknown discipline code " + code);
}

bool Taxonomy::precedes(LabelId ancestor, LabelId descendant) const {
  if (levels_.at(ancestor) >= levels_.at(descendant)) {
    return false;
  }
  std::vector<LabelId> frontier{descendant};
  while (!frontier.empty()) {
    std::vector<LabelId> next;
    for (LabelId n : frontier) {
      for (LabelId p : parents_[n]) {
        if (p == ancestor) {
          return true;
        }
        if (levels_[p] > levels_[ancestor]) {
          next.push_back(p);
        }
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    frontier = std::move(next);
  }
  return false;
}

std::vector<LabelSpec> Taxonomy::specs() const {
  std::vector<LabelSpec> out;
  for (LabelId id = 0; id < size(); ++id) {
    LabelSpec s{codes_[id], levels_[id], {}};
    for (LabelId p : parents_[id]) {
      s.parents.push_back(codes_[p]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

LabelPathSequence codes_to_path_sequence(std::span<const std::string> codes, const Taxonomy& tax) {
  if (codes.empty()) {
    throw ContractError("a label path sequence needs at least one code");
  }
  std::vector<std::set<LabelId>> per_level(tax.depth() + 1);
  std::size_t deepest = 0;
  for (const auto& code : codes) {
    const LabelId leaf = tax.id(code);
    if (leaf == tax.root()) {
      throw ContractError("the root is implicit and cannot be a gold code");
    }
    deepest = std::max(deepest, tax.level_of(leaf));
    std::vector<LabelId> frontier{leaf};
    while (!frontier.empty()) {
      std::vector<LabelId> next;
      for (LabelId n : frontier) {
        if (per_level[tax.level_of(n)].insert(n).second) {
          next.insert(next.end(), tax.parents(n).begin(), tax.parents(n).end());
        }
      }
      frontier = std::move(next);
    }
  }
  LabelPathSequence seq;
  for (std::size_t k = 0; k <= deepest; ++k) {
    seq.sets.emplace_back(per_level[k].begin(), per_level[k].end());
  }
  seq.stop_at = deepest;
  return seq;
}

std::vector<double> level_targets(const LabelPathSequence& seq, std::size_t k,
                                  const Taxonomy& tax) {
  if (k < 1 || k > tax.depth()) {
    throw IndexError("level " + std::to_string(k) + " outside 1.." + std::to_string(tax.depth()));
  }
  if (k >= seq.sets.size()) {
    throw ContractError("level " + std::to_string(k) + " lies past the end of the sequence");
  }
  std::vector<double> y(tax.level_size(k) + 1, 0.0);
  y[0] = (seq.stop_at && *seq.stop_at == k) ? 1.0 : 0.0;
  for (LabelId id : seq.sets[k]) {
    if (tax.level_of(id) != k) {
      throw ContractError("label " + tax.code(id) + " is not on level " + std::to_string(k));
    }
    y[tax.position(id) + 1] = 1.0;
  }
  return y;
}

std::vector<LabelId> terminal_labels(const LabelPathSequence& seq, const Taxonomy& tax) {
  std::vector<LabelId> out;
  for (std::size_t k = 1; k < seq.sets.size(); ++k) {
    for (LabelId id : seq.sets[k]) {
      bool has_child = false;
      if (k + 1 < seq.sets.size()) {
        for (LabelId c : seq.sets[k + 1]) {
          const auto& ps = tax.parents(c);
          has_child = has_child || std::binary_search(ps.begin(), ps.end(), id);
        }
      }
      if (!has_child) {
        out.push_back(id);
      }
    }
  }
  return out;
}

void check_path_sequence(const LabelPathSequence& seq, const Taxonomy& tax, bool require_parents) {
  if (seq.sets.empty() || seq.sets[0] != std::vector<LabelId>{tax.root()}) {
    throw ContractError("a label path sequence must start with {root}");
  }
  if (seq.sets.size() > tax.depth() + 1) {
    throw ContractError("label path sequence deeper than the taxonomy");
  }
  for (std::size_t k = 1; k < seq.sets.size(); ++k) {
    for (LabelId id : seq.sets[k]) {
      if (id >= tax.size() || tax.level_of(id) != k) {
        throw ContractError("label id " + std::to_string(id) + " is not on level " +
                            std::to_string(k));
      }
      if (require_parents) {
        const auto& ps = tax.parents(id);
        const auto& prev = seq.sets[k - 1];
        const bool linked = std::any_of(ps.begin(), ps.end(), [&](LabelId p) {
          return std::binary_search(prev.begin(), prev.end(), p);
        });
        if (!linked) {
          throw ContractError("label " + tax.code(id) + " has no parent in level " +
                              std::to_string(k - 1));
        }
      }
    }
  }
}

std::vector<std::vector<std::string>> sequence_codes(const LabelPathSequence& seq,
                                                     const Taxonomy& tax) {
  std::vector<std::vector<std::string>> out;
  for (const auto& set : seq.sets) {
    std::vector<std::string> level;
    for (LabelId id : set) {
      level.push_back(tax.code(id));
    }
    out.push_back(std::move(level));
  }
  return out;
}

}  // namespace ipc
