#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ipc/corpus.hpp"
#include "ipc/taxonomy.hpp"

namespace testing {

/// root; A, B, F; A01, B01, B02, F06; A0101, B0201, F0601, F0602.
inline ipc::Taxonomy small_taxonomy() {
  std::vector<ipc::LabelSpec> specs{
      {"root", 0, {}},       {"A", 1, {"root"}},    {"B", 1, {"root"}},    {"F", 1, {"root"}},
      {"A01", 2, {"A"}},     {"B01", 2, {"B"}},     {"B02", 2, {"B"}},     {"F06", 2, {"F"}},
      {"A0101", 3, {"A01"}}, {"B0201", 3, {"B02"}}, {"F0601", 3, {"F06"}}, {"F0602", 3, {"F06"}},
  };
  return ipc::Taxonomy::build(specs);
}

inline ipc::Proposal proposal(const std::string& id, const std::string& keywords,
                              std::vector<std::string> codes, const std::string& abstract = "") {
  ipc::Proposal p;
  p.id = id;
  for (std::size_t t = 0; t < ipc::kDocTypeCount; ++t) {
    p.documents[t].type = static_cast<ipc::DocType>(t);
  }
  p.documents[static_cast<std::size_t>(ipc::DocType::Keywords)].tokens = ipc::tokenize(keywords, {});
  p.documents[static_cast<std::size_t>(ipc::DocType::Abstract)].tokens = ipc::tokenize(abstract, {});
  p.gold_codes = std::move(codes);
  return p;
}

}  // namespace testing

#include "ipc/model.hpp"

namespace testing {

inline ipc::Config tiny_config() {
  auto c = ipc::Config::for_profile("desk");
  c.model.hidden = 8;
  c.model.heads = 2;
  c.model.sie_layers = 1;
  c.model.fusion_layers = 1;
  c.model.ffn_mult = 2;
  c.model.lengths = {3, 4, 6, 2};
  c.train.batch = 4;
  c.train.warmup = 5;
  return c;
}

/// A few proposals over small_taxonomy(), one of them interdisciplinary.
inline std::vector<ipc::Proposal> small_corpus() {
  return {proposal("p1", "alpha beta", {"A0101"}, "alpha x"),
          proposal("p2", "beta gamma", {"B0201"}, "gamma y"),
          proposal("p3", "delta eps", {"F0601", "B0201"}, "delta z"),
          proposal("p4", "eps zeta", {"F0602"}, "zeta w"),
          proposal("p5", "beta", {"B01"}, "y")};
}

inline ipc::InterGraph small_graph(const ipc::Taxonomy& tax) {
  ipc::InterGraph g(tax.size(), 1.0, 1.0);
  g.set_edge(tax.id("F"), tax.id("B"), 0.3);
  g.set_edge(tax.id("B"), tax.id("F"), 0.1);
  g.set_edge(tax.id("F06"), tax.id("B02"), 0.25);
  g.set_edge(tax.id("F0601"), tax.id("B0201"), 0.5);
  return g;
}

template <typename T>
std::unique_ptr<ipc::Model<T>> tiny_model(std::uint64_t seed = 3, ipc::Config cfg = tiny_config()) {
  auto tax = small_taxonomy();
  auto vocab = ipc::Vocab::build(small_corpus());
  auto g = small_graph(tax);
  return std::make_unique<ipc::Model<T>>(cfg, std::move(tax), std::move(g), std::move(vocab), seed);
}

inline std::vector<ipc::EncodedProposal> small_encoded(const ipc::Config& cfg = tiny_config()) {
  return ipc::encode_all(small_corpus(), ipc::Vocab::build(small_corpus()), cfg.model.lengths,
                         small_taxonomy());
}

}  // namespace testing
