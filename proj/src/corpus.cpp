#include "ipc/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "ipc/errors.hpp"

namespace ipc {

std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& options) {
  std::string folded(text);
  if (options.lowercase) {
    std::transform(folded.begin(), folded.end(), folded.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  }
  std::vector<std::string> out;
  if (options.char_level) {
    for (std::size_t i = 0; i < folded.size();) {
      const auto lead = static_cast<unsigned char>(folded[i]);
      std::size_t len = 1;
      if (lead >= 0xF0) {
        len = 4;
      } else if (lead >= 0xE0) {
        len = 3;
      } else if (lead >= 0xC0) {
        len = 2;
      }
      len = std::min(len, folded.size() - i);
      if (!std::isspace(lead)) {
        out.emplace_back(folded.substr(i, len));
      }
      i += len;
    }
    return out;
  }
  std::istringstream in(folded);
  std::string word;
  while (in >> word) {
    out.push_back(word);
  }
  return out;
}

Vocab::Vocab() {
  add(std::string(kPadToken));
  add(std::string(kUnkToken));
}

Vocab::Vocab(const std::vector<std::string>& tokens) {
  if (tokens.size() < 2 || tokens[0] != kPadToken || tokens[1] != kUnkToken) {
    throw ConfigError("vocabulary must start with <pad>, <unk>");
  }
  for (const auto& t : tokens) {
    if (contains(t)) {
      throw ConfigError("duplicate vocabulary token " + t);
    }
    add(t);
  }
}

void Vocab::add(const std::string& token) {
  by_token_.emplace(token, tokens_.size());
  tokens_.push_back(token);
}

Vocab Vocab::build(const std::vector<Proposal>& proposals, std::size_t min_count) {
  std::unordered_map<std::string, std::size_t> counts;
  std::vector<std::string> order;
  for (const auto& p : proposals) {
    for (const auto& d : p.documents) {
      for (const auto& t : d.tokens) {
        if (counts[t]++ == 0) {
          order.push_back(t);
        }
      }
    }
  }
  Vocab v;
  for (const auto& t : order) {
    if (counts[t] >= min_count && !v.contains(t)) {
      v.add(t);
    }
  }
  return v;
}

std::size_t Vocab::index(const std::string& token) const {
  auto it = by_token_.find(token);
  return it == by_token_.end() ? kUnk : it->second;
}

EncodedProposal encode(const Proposal& p, const Vocab& vocab, const DocLengths& lengths,
                       const Taxonomy& tax) {
  EncodedProposal e;
  e.id = p.id;
  for (std::size_t t = 0; t < kDocTypeCount; ++t) {
    auto& doc = e.documents[t];
    doc.ids.assign(lengths[t], Vocab::kPad);
    const auto& tokens = p.documents[t].tokens;
    const std::size_t n = std::min(tokens.size(), lengths[t]);
    for (std::size_t i = 0; i < n; ++i) {
      doc.ids[i] = vocab.index(tokens[i]);
      if (doc.ids[i] != Vocab::kPad) {
        doc.length = i + 1;
      }
    }
  }
  e.gold = codes_to_path_sequence(p.gold_codes, tax);
  return e;
}

std::vector<EncodedProposal> encode_all(const std::vector<Proposal>& ps, const Vocab& vocab,
                                        const DocLengths& lengths, const Taxonomy& tax) {
  std::vector<EncodedProposal> out;
  out.reserve(ps.size());
  for (const auto& p : ps) {
    out.push_back(encode(p, vocab, lengths, tax));
  }
  return out;
}

LoadResult parse_jsonl(std::istream& in, const Taxonomy& tax, const LoadOptions& options) {
  LoadResult result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!rec.is_object()) {
      throw ParseError("line " + std::to_string(lineno) + ": record is not a JSON object");
    }
    std::string missing;
    for (const char* field : {"id", "title", "keywords", "abstract", "research_field", "labels"}) {
      if (!rec.contains(field) || rec[field].is_null()) {
        missing = field;
        break;
      }
    }
    if (missing.empty() && (!rec["labels"].is_array() || rec["labels"].empty())) {
      missing = "labels";
    }
    if (!missing.empty()) {
      result.skipped.push_back("line " + std::to_string(lineno) + ": missing " + missing);
      continue;
    }
    Proposal p;
    try {
      p.id = rec["id"].is_string() ? rec["id"].get<std::string>() : rec["id"].dump();
      for (std::size_t t = 0; t < kDocTypeCount; ++t) {
        p.documents[t].type = static_cast<DocType>(t);
        const auto& field = rec[std::string(kDocTypeNames[t])];
        std::string text;
        if (field.is_array()) {
          for (const auto& w : field) {
            text += w.get<std::string>() + " ";
          }
        } else {
          text = field.get<std::string>();
        }
        auto tokens = tokenize(text, options.tokenizer);
        if (tokens.size() > options.lengths[t]) {
          tokens.resize(options.lengths[t]);
        }
        p.documents[t].tokens = std::move(tokens);
      }
      p.gold_codes = rec["labels"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
    std::string unknown;
    for (const auto& c : p.gold_codes) {
      if (!tax.find(c) || *tax.find(c) == tax.root()) {
        unknown += (unknown.empty() ? "" : ", ") + c;
      }
    }
    if (!unknown.empty()) {
      throw LookupError("line " + std::to_string(lineno) + ": unknown discipline codes " + unknown);
    }
    result.proposals.push_back(std::move(p));
  }
  return result;
}

LoadResult load_jsonl(const std::filesystem::path& path, const Taxonomy& tax,
                      const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open corpus file " + path.string());
  }
  return parse_jsonl(in, tax, options);
}

nlohmann::json proposal_to_json(const Proposal& p) {
  nlohmann::json rec;
  rec["id"] = p.id;
  for (std::size_t t = 0; t < kDocTypeCount; ++t) {
    std::string text;
    for (const auto& w : p.documents[t].tokens) {
      text += (text.empty() ? "" : " ") + w;
    }
    rec[std::string(kDocTypeNames[t])] = text;
  }
  rec["labels"] = p.gold_codes;
  return rec;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Proposal>& ps) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError("cannot write " + path.string());
  }
  for (const auto& p : ps) {
    out << proposal_to_json(p).dump() << '\n';
  }
}

EmbeddingTable random_embeddings(const Vocab& vocab, std::size_t width, double stddev, Rng& rng) {
  EmbeddingTable table;
  table.width = width;
  table.values.resize(vocab.size() * width);
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      table.values[r * width + c] =
          r == Vocab::kPad ? 0.0f : static_cast<float>(rng.normal(0.0, stddev));
    }
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, const Vocab& vocab,
                               std::size_t width, Rng& rng) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open embedding file " + path.string());
  }
  EmbeddingTable table = random_embeddings(vocab, width, 0.02, rng);
  std::vector<bool> filled(vocab.size(), false);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) {
      continue;
    }
    std::vector<float> values;
    std::string v;
    while (fields >> v) {
      try {
        values.push_back(std::stof(v));
      } catch (const std::exception&) {
        throw ParseError("embedding line " + std::to_string(lineno) + ": bad number " + v);
      }
    }
    if (lineno == 1 && values.size() == 1) {
      continue;  // word2vec "count dim" header
    }
    if (values.size() != width) {
      throw ConfigError("embedding dimension " + std::to_string(values.size()) +
                        " does not match configured h=" + std::to_string(width));
    }
    const std::size_t row = vocab.index(token);
    if (row == Vocab::kPad || (row == Vocab::kUnk && token != kUnkToken) || filled[row]) {
      continue;
    }
    std::copy(values.begin(), values.end(), table.values.begin() + static_cast<std::ptrdiff_t>(row * width));
    filled[row] = true;
    ++table.covered;
  }
  return table;
}

}  // namespace ipc
