#include "ipc/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ipc/errors.hpp"

namespace ipc {

KeywordStats collect_stats(const std::vector<Proposal>& corpus, const Taxonomy& tax,
                           const StatsOptions& options) {
  KeywordStats stats;
  stats.frequency.resize(tax.size());
  for (const auto& p : corpus) {
    std::set<std::string> keywords;
    for (auto k : p.document(DocType::Keywords).tokens) {
      if (k == kPadToken) {
        continue;
      }
      if (options.fold_case) {
        std::transform(k.begin(), k.end(), k.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      }
      keywords.insert(std::move(k));
    }
    if (keywords.empty()) {
      ++stats.skipped;
      continue;
    }
    std::set<LabelId> disciplines;
    if (options.policy == LevelPolicy::GoldCodesOnly) {
      for (const auto& c : p.gold_codes) {
        disciplines.insert(tax.id(c));
      }
    } else {
      const auto seq = codes_to_path_sequence(p.gold_codes, tax);
      for (std::size_t k = 1; k < seq.sets.size(); ++k) {
        disciplines.insert(seq.sets[k].begin(), seq.sets[k].end());
      }
    }
    for (LabelId a : disciplines) {
      for (const auto& k : keywords) {
        ++stats.frequency[a][k];
      }
    }
  }
  return stats;
}

namespace {

const std::map<std::string, std::size_t>& keywords_of(LabelId a, const KeywordStats& stats) {
  if (!stats.has(a)) {
    throw ContractError("discipline " + std::to_string(a) + " has no keywords");
  }
  return stats.frequency[a];
}

const std::map<std::string, std::size_t>& keywords_or_empty(LabelId b, const KeywordStats& stats) {
  static const std::map<std::string, std::size_t> empty;
  return b < stats.frequency.size() ? stats.frequency[b] : empty;
}

}  // namespace

double penetration(LabelId a, LabelId b, const KeywordStats& stats) {
  const auto& fa = keywords_of(a, stats);
  const auto& fb = keywords_or_empty(b, stats);
  double shared = 0.0, total = 0.0;
  for (const auto& [k, f] : fa) {
    total += static_cast<double>(f);
    if (fb.count(k) != 0) {
      shared += static_cast<double>(f);
    }
  }
  return shared / total;
}

double disparity(LabelId a, LabelId b, const KeywordStats& stats) {
  const auto& fa = keywords_of(a, stats);
  const auto& fb = keywords_or_empty(b, stats);
  std::size_t common = 0;
  for (const auto& [k, _] : fa) {
    common += fb.count(k);
  }
  return 1.0 - static_cast<double>(common) / static_cast<double>(fa.size());
}

InterGraph::InterGraph(std::size_t nodes, double alpha, double beta)
    : out_(nodes), in_(nodes), alpha_(alpha), beta_(beta) {}

void InterGraph::set_edge(LabelId src, LabelId dst, double weight) {
  if (src >= nodes() || dst >= nodes()) {
    throw ContractError("edge endpoint outside the graph");
  }
  if (src == dst) {
    throw ContractError("self-edges are not allowed");
  }
  if (!(weight >= 0.0) || !std::isfinite(weight)) {
    throw ContractError("edge weights must be finite and nonnegative");
  }
  if (weight == 0.0) {
    out_[src].erase(dst);
    in_[dst].erase(src);
    return;
  }
  out_[src][dst] = weight;
  in_[dst][src] = weight;
}

double InterGraph::weight(LabelId src, LabelId dst) const {
  const auto& row = out_.at(src);
  auto it = row.find(dst);
  return it == row.end() ? 0.0 : it->second;
}

std::vector<LabelId> InterGraph::neighbors(LabelId n) const {
  std::vector<LabelId> out;
  for (const auto& [d, _] : out_.at(n)) {
    out.push_back(d);
  }
  for (const auto& [s, _] : in_.at(n)) {
    out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Edge> InterGraph::edges() const {
  std::vector<Edge> out;
  for (LabelId s = 0; s < out_.size(); ++s) {
    for (const auto& [d, w] : out_[s]) {
      out.push_back({s, d, w});
    }
  }
  return out;
}

std::size_t InterGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& row : out_) {
    n += row.size();
  }
  return n;
}

std::string format_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string InterGraph::to_tsv(const Taxonomy& tax) const {
  std::ostringstream out;
  for (const auto& e : edges()) {
    out << tax.code(e.src) << '\t' << tax.code(e.dst) << '\t' << format_exact(e.weight) << '\n';
  }
  return out.str();
}

InterGraph InterGraph::from_tsv(const std::string& text, const Taxonomy& tax) {
  InterGraph g(tax.size(), 1.0, 1.0);
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    std::istringstream fields(line);
    std::string src, dst, w;
    if (!std::getline(fields, src, '\t') || !std::getline(fields, dst, '\t') ||
        !std::getline(fields, w)) {
      throw ParseError("graph TSV line " + std::to_string(lineno) + ": expected 3 fields");
    }
    double weight = 0.0;
    try {
      std::size_t used = 0;
      weight = std::stod(w, &used);
      if (used != w.size()) {
        throw std::invalid_argument(w);
      }
    } catch (const std::exception&) {
      throw ParseError("graph TSV line " + std::to_string(lineno) + ": bad weight " + w);
    }
    g.set_edge(tax.id(src), tax.id(dst), weight);
  }
  return g;
}

nlohmann::json InterGraph::to_json(const Taxonomy& tax) const {
  nlohmann::json edges_json = nlohmann::json::array();
  for (const auto& e : edges()) {
    // Weights travel as exact decimal strings.
    edges_json.push_back({{"src", tax.code(e.src)}, {"dst", tax.code(e.dst)},
                          {"weight", format_exact(e.weight)}});
  }
  return {{"alpha", alpha_}, {"beta", beta_}, {"nodes", nodes()}, {"edges", edges_json}};
}

InterGraph InterGraph::from_json(const nlohmann::json& doc, const Taxonomy& tax) {
  try {
    InterGraph g(tax.size(), doc.value("alpha", 1.0), doc.value("beta", 1.0));
    for (const auto& e : doc.at("edges")) {
      const auto& w = e.at("weight");
      const double weight = w.is_string() ? std::stod(w.get<std::string>()) : w.get<double>();
      g.set_edge(tax.id(e.at("src").get<std::string>()), tax.id(e.at("dst").get<std::string>()),
                 weight);
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("graph JSON: ") + e.what());
  }
}

InterGraph InterGraph::load(const std::filesystem::path& path, const Taxonomy& tax) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open graph file " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.extension() == ".json") {
    try {
      return from_json(nlohmann::json::parse(buf.str()), tax);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("graph file " + path.string() + ": " + e.what());
    }
  }
  return from_tsv(buf.str(), tax);
}

InterGraph build_graph(const KeywordStats& stats, const GraphOptions& options) {
  if (options.alpha < 0.0 || options.beta < 0.0) {
    throw ConfigError("alpha and beta must be nonnegative");
  }
  InterGraph g(stats.disciplines(), options.alpha, options.beta);
  for (LabelId a = 0; a < stats.disciplines(); ++a) {
    if (!stats.has(a)) {
      continue;
    }
    for (LabelId b = 0; b < stats.disciplines(); ++b) {
      if (a == b || !stats.has(b)) {
        continue;
      }
      const double e = std::pow(penetration(a, b, stats), options.alpha) *
                       std::pow(disparity(a, b, stats), options.beta);
      if (e > options.threshold) {
        g.set_edge(a, b, e);
      }
    }
  }
  return g;
}

double rao_stirling_diversity(const KeywordStats& stats, double alpha, double beta) {
  std::vector<double> mass(stats.disciplines(), 0.0);
  double total = 0.0;
  for (LabelId a = 0; a < stats.disciplines(); ++a) {
    for (const auto& [_, f] : stats.frequency[a]) {
      mass[a] += static_cast<double>(f);
    }
    total += mass[a];
  }
  if (total == 0.0) {
    return 0.0;
  }
  double rs = 0.0;
  for (LabelId a = 0; a < stats.disciplines(); ++a) {
    for (LabelId b = 0; b < stats.disciplines(); ++b) {
      if (a == b || !stats.has(a) || !stats.has(b)) {
        continue;
      }
      const double d = 0.5 * (disparity(a, b, stats) + disparity(b, a, stats));
      rs += std::pow(mass[a] / total * mass[b] / total, alpha) * std::pow(d, beta);
    }
  }
  return rs;
}

}  // namespace ipc
