#include <algorithm>
#include <set>

#include "ipc/corpus.hpp"
#include "ipc/errors.hpp"

namespace ipc {

namespace {

std::string top_code(std::size_t i) {
  // A..Z, then AA, AB, ...
  std::string out;
  ++i;
  while (i > 0) {
    --i;
    out.insert(out.begin(), static_cast<char>('A' + i % 26));
    i /= 26;
  }
  return out;
}

std::string child_code(const std::string& parent, std::size_t i) {
  const std::string digits = std::to_string(i + 1);
  return parent + (digits.size() < 2 ? "0" + digits : digits);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

SynthSpec SynthSpec::from_json(const nlohmann::json& doc) {
  SynthSpec s;
  try {
    s.seed = doc.value("seed", s.seed);
    s.level_sizes = doc.value("level_sizes", s.level_sizes);
    s.proposals = doc.value("proposals", s.proposals);
    s.interdisciplinary_rate = doc.value("interdisciplinary_rate", s.interdisciplinary_rate);
    s.shallow_rate = doc.value("shallow_rate", s.shallow_rate);
    s.keywords_per_label = doc.value("keywords_per_label", s.keywords_per_label);
    s.noise_vocab = doc.value("noise_vocab", s.noise_vocab);
    s.noise_rate = doc.value("noise_rate", s.noise_rate);
    s.secondary_share = doc.value("secondary_share", s.secondary_share);
    if (doc.contains("lengths")) {
      const auto& l = doc["lengths"];
      for (std::size_t t = 0; t < kDocTypeCount; ++t) {
        s.lengths[t] = l.value(std::string(kDocTypeNames[t]), s.lengths[t]);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic spec: ") + e.what());
  }
  return s;
}

nlohmann::json SynthSpec::to_json() const {
  nlohmann::json lengths_json;
  for (std::size_t t = 0; t < kDocTypeCount; ++t) {
    lengths_json[std::string(kDocTypeNames[t])] = lengths[t];
  }
  return {{"seed", seed},
          {"level_sizes", level_sizes},
          {"proposals", proposals},
          {"interdisciplinary_rate", interdisciplinary_rate},
          {"shallow_rate", shallow_rate},
          {"keywords_per_label", keywords_per_label},
          {"noise_vocab", noise_vocab},
          {"noise_rate", noise_rate},
          {"secondary_share", secondary_share},
          {"lengths", lengths_json}};
}

SynthCorpus synth_corpus(const SynthSpec& spec) {
  if (spec.level_sizes.empty() || spec.level_sizes[0] == 0) {
    throw ConfigError("synthetic spec needs at least one non-empty level");
  }
  for (std::size_t k = 1; k < spec.level_sizes.size(); ++k) {
    if (spec.level_sizes[k] == 0 || spec.level_sizes[k] % spec.level_sizes[k - 1] != 0) {
      throw ConfigError("level_sizes[" + std::to_string(k) + "] must be a positive multiple of " +
                        std::to_string(spec.level_sizes[k - 1]));
    }
  }
  for (double rate : {spec.interdisciplinary_rate, spec.shallow_rate, spec.noise_rate,
                      spec.secondary_share}) {
    if (rate < 0.0 || rate > 1.0) {
      throw ConfigError("synthetic rates must lie in [0, 1]");
    }
  }
  if (spec.interdisciplinary_rate > 0.0 && spec.level_sizes[0] < 2) {
    throw ConfigError("interdisciplinary proposals need at least two top-level labels");
  }
  if (spec.keywords_per_label == 0) {
    throw ConfigError("keywords_per_label must be positive");
  }
  if (spec.noise_rate > 0.0 && spec.noise_vocab == 0) {
    throw ConfigError("noise_rate > 0 needs a noise vocabulary");
  }
  for (std::size_t len : spec.lengths) {
    if (len == 0) {
      throw ConfigError("synthetic document lengths must be positive");
    }
  }

  // Taxonomy: a balanced tree with contiguous children.
  std::vector<LabelSpec> labels{{"root", 0, {}}};
  std::vector<std::vector<std::string>> level_codes{{"root"}};
  for (std::size_t k = 0; k < spec.level_sizes.size(); ++k) {
    std::vector<std::string> codes;
    if (k == 0) {
      for (std::size_t i = 0; i < spec.level_sizes[0]; ++i) {
        codes.push_back(top_code(i));
        labels.push_back({codes.back(), 1, {"root"}});
      }
    } else {
      const std::size_t fan = spec.level_sizes[k] / spec.level_sizes[k - 1];
      for (const auto& parent : level_codes.back()) {
        for (std::size_t i = 0; i < fan; ++i) {
          codes.push_back(child_code(parent, i));
          labels.push_back({codes.back(), k + 1, {parent}});
        }
      }
    }
    level_codes.push_back(std::move(codes));
  }
  SynthCorpus corpus;
  corpus.taxonomy = Taxonomy::build(labels);
  const Taxonomy& tax = corpus.taxonomy;
  const std::size_t depth = tax.depth();

  std::vector<std::vector<std::string>> pools(tax.size());
  for (LabelId id = 1; id < tax.size(); ++id) {
    for (std::size_t j = 0; j < spec.keywords_per_label; ++j) {
      pools[id].push_back(lower(tax.code(id)) + "w" + std::to_string(j));
    }
  }
  std::vector<std::string> noise;
  for (std::size_t j = 0; j < spec.noise_vocab; ++j) {
    noise.push_back("n" + std::to_string(j));
  }

  Rng rng(spec.seed);
  auto pick_child = [&](LabelId parent) {
    const auto& kids = tax.children(parent);
    return kids[rng.below(kids.size())];
  };
  auto make_path = [&](LabelId top) {
    std::vector<LabelId> path{top};
    std::size_t target = depth;
    if (depth > 1 && rng.bernoulli(spec.shallow_rate)) {
      target = depth - 1;
    }
    while (path.size() < target) {
      path.push_back(pick_child(path.back()));
    }
    return path;
  };

  for (std::size_t n = 0; n < spec.proposals; ++n) {
    Proposal p;
    p.id = "syn-" + std::to_string(n);
    const LabelId top = tax.level_offset(1) + rng.below(tax.level_size(1));
    std::vector<std::vector<LabelId>> paths{make_path(top)};
    if (rng.bernoulli(spec.interdisciplinary_rate)) {
      LabelId other = top;
      while (other == top) {
        other = tax.level_offset(1) + rng.below(tax.level_size(1));
      }
      paths.push_back(make_path(other));
    }
    for (const auto& path : paths) {
      p.gold_codes.push_back(tax.code(path.back()));
    }

    auto label_token = [&](std::size_t max_level) {
      const auto& path = (paths.size() > 1 && rng.bernoulli(spec.secondary_share)) ? paths[1] : paths[0];
      const std::size_t reach = std::min(path.size(), max_level);
      const LabelId label = path[rng.below(reach)];
      const auto& pool = pools[label];
      return pool[rng.below(pool.size())];
    };
    for (std::size_t t = 0; t < kDocTypeCount; ++t) {
      auto& doc = p.documents[t];
      doc.type = static_cast<DocType>(t);
      const std::size_t max_len = spec.lengths[t];
      const std::size_t len = max_len / 2 + rng.below(max_len - max_len / 2) + 1;
      const auto type = static_cast<DocType>(t);
      // Research fields name broad areas; keywords are nearly noise-free.
      const std::size_t reach = type == DocType::ResearchField ? 2 : depth;
      const double noise_rate = type == DocType::Keywords ? spec.noise_rate / 4 : spec.noise_rate;
      for (std::size_t i = 0; i < len; ++i) {
        if (!noise.empty() && rng.bernoulli(noise_rate)) {
          doc.tokens.push_back(noise[rng.below(noise.size())]);
        } else {
          doc.tokens.push_back(label_token(reach));
        }
      }
    }
    corpus.proposals.push_back(std::move(p));
  }
  corpus.vocab = Vocab::build(corpus.proposals);
  return corpus;
}

}  // namespace ipc
