#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "ipc/rng.hpp"
#include "ipc/taxonomy.hpp"

namespace ipc {

/// Document types in their fixed order inside every proposal.
enum class DocType : std::size_t { Title = 0, Keywords = 1, Abstract = 2, ResearchField = 3 };

inline constexpr std::size_t kDocTypeCount = 4;
inline constexpr std::array<std::string_view, kDocTypeCount> kDocTypeNames{
    "title", "keywords", "abstract", "research_field"};

/// Per-type token budget, indexed by DocType.
using DocLengths = std::array<std::size_t, kDocTypeCount>;

inline constexpr DocLengths kDefaultDocLengths{32, 32, 200, 32};

struct TokenizerOptions {
  /// Split into UTF-8 code points instead of whitespace words.
  bool char_level = false;
  /// ASCII case folding before matching.
  bool lowercase = false;
};

std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& options);

struct Document {
  DocType type = DocType::Title;
  std::vector<std::string> tokens;
};

/// A proposal after tokenization and truncation. Documents appear in DocType order.
struct Proposal {
  std::string id;
  std::array<Document, kDocTypeCount> documents;
  std::vector<std::string> gold_codes;

  const Document& document(DocType t) const { return documents[static_cast<std::size_t>(t)]; }
};

inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnkToken = "<unk>";

/// Token index. Index 0 is PAD and 1 is UNK.
class Vocab {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;

  Vocab();
  explicit Vocab(const std::vector<std::string>& tokens);
  /// Tokens in first-occurrence order over documents of every proposal.
  static Vocab build(const std::vector<Proposal>& proposals, std::size_t min_count = 1);

  std::size_t size() const { return tokens_.size(); }
  std::size_t index(const std::string& token) const;
  bool contains(const std::string& token) const { return by_token_.count(token) != 0; }
  const std::string& token(std::size_t i) const { return tokens_.at(i); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  void add(const std::string& token);
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> by_token_;
};

/// Token ids of one document padded with PAD to its type's length; `length`
/// counts the positions before the padded tail.
struct EncodedDocument {
  std::vector<std::size_t> ids;
  std::size_t length = 0;
};

struct EncodedProposal {
  std::string id;
  std::array<EncodedDocument, kDocTypeCount> documents;
  LabelPathSequence gold;
};

EncodedProposal encode(const Proposal& p, const Vocab& vocab, const DocLengths& lengths,
                       const Taxonomy& tax);
std::vector<EncodedProposal> encode_all(const std::vector<Proposal>& ps, const Vocab& vocab,
                                        const DocLengths& lengths, const Taxonomy& tax);

struct LoadOptions {
  DocLengths lengths = kDefaultDocLengths;
  TokenizerOptions tokenizer;
};

struct LoadResult {
  std::vector<Proposal> proposals;
  /// Incomplete records that were filtered out, as "line N: reason".
  std::vector<std::string> skipped;
};

/// Reads one proposal per line. Records missing a field are filtered and
/// reported; malformed JSON throws ParseError with the line number and unknown
/// codes throw LookupError listing them.
LoadResult load_jsonl(const std::filesystem::path& path, const Taxonomy& tax,
                      const LoadOptions& options = {});
LoadResult parse_jsonl(std::istream& in, const Taxonomy& tax, const LoadOptions& options = {});

nlohmann::json proposal_to_json(const Proposal& p);
void write_jsonl(const std::filesystem::path& path, const std::vector<Proposal>& ps);

/// Word vectors, row-major |V| x width. Row PAD is always zero.
struct EmbeddingTable {
  std::size_t width = 0;
  std::vector<float> values;
  std::size_t covered = 0;  // rows taken from the file
};

/// Reads "token v1 ... vh" lines (an optional word2vec "count dim" header is
/// skipped). Rows missing from the file are drawn from N(0, 0.02^2).
EmbeddingTable load_embeddings(const std::filesystem::path& path, const Vocab& vocab,
                               std::size_t width, Rng& rng);
/// N(0, stddev^2) rows with a zero PAD row.
EmbeddingTable random_embeddings(const Vocab& vocab, std::size_t width, double stddev, Rng& rng);

/// Distributional vectors from the proposals themselves: positive PMI of
/// tokens co-occurring in one proposal, factored by its top `width`
/// eigenpairs. Rows are rescaled to a mean norm of sqrt(width) to match the
/// N(0, 1) default. Only the `max_tokens` most frequent tokens are factored;
/// other rows, and all rows when the corpus is empty, stay N(0, 1).
EmbeddingTable pretrain_embeddings(const std::vector<Proposal>& proposals, const Vocab& vocab,
                                   std::size_t width, Rng& rng, std::size_t max_tokens = 4000);

// ---- synthetic corpora ------------------------------------------------------

struct SynthSpec {
  std::uint64_t seed = 1;
  /// Labels per level 1..H; each level must be a multiple of the one above.
  std::vector<std::size_t> level_sizes{8, 24, 48};
  std::size_t proposals = 200;
  /// Fraction of proposals with a second path under a different top-level label.
  double interdisciplinary_rate = 0.2;
  /// Fraction of paths that stop one level above the leaves.
  double shallow_rate = 0.1;
  std::size_t keywords_per_label = 6;
  std::size_t noise_vocab = 300;
  /// Probability that a content token is drawn from the noise vocabulary.
  double noise_rate = 0.35;
  /// Share of label tokens drawn from the secondary path when there is one.
  double secondary_share = 0.4;
  DocLengths lengths{12, 8, 48, 8};

  static SynthSpec from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

struct SynthCorpus {
  Taxonomy taxonomy;
  std::vector<Proposal> proposals;
  Vocab vocab;
};

SynthCorpus synth_corpus(const SynthSpec& spec);

}  // namespace ipc
