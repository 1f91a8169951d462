#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace ipc {

/// Dense label index. Ids are assigned level by level, so the root is 0 and
/// the labels of one level are contiguous.
using LabelId = std::size_t;

/// One label as declared in a taxonomy file.
struct LabelSpec {
  std::string code;
  std::size_t level = 0;
  std::vector<std::string> parents;
};

/// First axiom broken by a label declaration list, with the offending pair.
struct Violation {
  std::string axiom;
  std::string first;
  std::string second;
  std::string message() const;
};

/// Checks single root, unique level per code, parents on the previous level,
/// and non-empty contiguous levels. Acyclicity, asymmetry and anti-reflexivity
/// follow from edges only ever pointing one level up.
std::optional<Violation> validate(std::span<const LabelSpec> labels);

/// Leveled discipline DAG C_0..C_H with the Belong-to order.
class Taxonomy {
 public:
  Taxonomy() = default;

  /// Throws ConfigError carrying the violation when `labels` is not valid.
  static Taxonomy build(std::span<const LabelSpec> labels);
  static Taxonomy from_json(const nlohmann::json& doc);
  static Taxonomy load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  std::size_t size() const { return codes_.size(); }
  /// Deepest level index H.
  std::size_t depth() const { return level_offsets_.size() - 2; }
  LabelId root() const { return 0; }

  /// Number of labels |C_k|.
  std::size_t level_size(std::size_t k) const;
  /// First id of level k; labels of level k are [offset, offset + size).
  LabelId level_offset(std::size_t k) const;
  std::size_t level_of(LabelId id) const { return levels_.at(id); }
  /// Index of the label inside its level, i.e. its slot in C_k (0-based).
  std::size_t position(LabelId id) const { return id - level_offset(levels_.at(id)); }

  const std::string& code(LabelId id) const { return codes_.at(id); }
  std::optional<LabelId> find(const std::string& code) const;
  /// Throws LookupError when the code is unknown.
  LabelId id(const std::string& code) const;

  const std::vector<LabelId>& parents(LabelId id) const { return parents_.at(id); }
  const std::vector<LabelId>& children(LabelId id) const { return children_.at(id); }
  /// True when `ancestor` ≺ `descendant` (strict, transitive).
  bool precedes(LabelId ancestor, LabelId descendant) const;

  std::vector<LabelSpec> specs() const;

 private:
  std::vector<std::string> codes_;
  std::vector<std::size_t> levels_;
  std::vector<std::vector<LabelId>> parents_;
  std::vector<std::vector<LabelId>> children_;
  std::vector<LabelId> level_offsets_;  // H + 2 entries, last is size()
  std::unordered_map<std::string, LabelId> by_code_;
};

/// Per-level label sets [L_0, L_1, ..., L_{H_A}] of one proposal. Sets are
/// sorted by id. `stop_at` is the level carrying the end-of-prediction label;
/// it is absent for a decode that hit the depth bound without stopping.
struct LabelPathSequence {
  std::vector<std::vector<LabelId>> sets;
  std::optional<std::size_t> stop_at;

  std::size_t depth() const { return sets.empty() ? 0 : sets.size() - 1; }
  bool operator==(const LabelPathSequence&) const = default;
};

/// Unions the ancestor chains of every code per level. The sequence stops at
/// the deepest level reached. Throws LookupError for unknown codes.
LabelPathSequence codes_to_path_sequence(std::span<const std::string> codes, const Taxonomy& tax);

/// Binary targets of length |C_k| + 1 for level k: slot 0 is the stop label,
/// slot i + 1 is label i of C_k. Throws IndexError for k outside 1..H and
/// ContractError for k past the end of the sequence.
std::vector<double> level_targets(const LabelPathSequence& seq, std::size_t k, const Taxonomy& tax);

/// Labels of the sequence that have no child in the next level's set.
std::vector<LabelId> terminal_labels(const LabelPathSequence& seq, const Taxonomy& tax);

/// Throws ContractError unless sets are level-correct, start with {root} and
/// every label below level 1 has a parent in the previous set.
void check_path_sequence(const LabelPathSequence& seq, const Taxonomy& tax, bool require_parents);

std::vector<std::vector<std::string>> sequence_codes(const LabelPathSequence& seq,
                                                     const Taxonomy& tax);

}  // namespace ipc
