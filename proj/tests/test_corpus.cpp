#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "ipc/corpus.hpp"
#include "ipc/rng.hpp"

using namespace ipc;

namespace {

std::string line(const std::string& id, const std::string& labels, const std::string& abstract = "a b") {
  return R"({"id":")" + id + R"(","title":"t1 t2","keywords":"k1 k2","abstract":")" + abstract +
         R"(","research_field":"r","labels":)" + labels + "}\n";
}

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("a complete record yields four typed documents") {
  const auto t = testing::small_taxonomy();
  std::istringstream in(line("p1", R"(["F0601","B02"])"));
  const auto r = parse_jsonl(in, t);
  REQUIRE(r.proposals.size() == 1);
  const auto& p = r.proposals[0];
  CHECK(p.id == "p1");
  CHECK(p.documents.size() == 4);
  CHECK(p.document(DocType::Title).tokens == std::vector<std::string>{"t1", "t2"});
  CHECK(p.document(DocType::ResearchField).type == DocType::ResearchField);
  CHECK(p.gold_codes == std::vector<std::string>{"F0601", "B02"});
}

TEST_CASE("long text is truncated to the configured length") {
  const auto t = testing::small_taxonomy();
  std::string abstract;
  for (int i = 0; i < 250; ++i) {
    abstract += "w" + std::to_string(i) + " ";
  }
  std::istringstream in(line("p", R"(["A"])", abstract));
  const auto r = parse_jsonl(in, t);
  CHECK(r.proposals[0].document(DocType::Abstract).tokens.size() == 200);
  CHECK(r.proposals[0].document(DocType::Abstract).tokens.back() == "w199");
}

TEST_CASE("incomplete records are filtered and reported") {
  const auto t = testing::small_taxonomy();
  std::istringstream in(line("ok", R"(["A"])") + R"({"id":"x","title":"t","labels":["A"]})" + "\n" +
                        R"({"id":"y","title":"t","keywords":"k","abstract":"a","research_field":"r","labels":[]})" +
                        "\n");
  const auto r = parse_jsonl(in, t);
  CHECK(r.proposals.size() == 1);
  REQUIRE(r.skipped.size() == 2);
  CHECK(r.skipped[0] == "line 2: missing keywords");
  CHECK(r.skipped[1] == "line 3: missing labels");
}

TEST_CASE("malformed JSON names the line; unknown codes are listed") {
  const auto t = testing::small_taxonomy();
  std::istringstream bad(line("ok", R"(["A"])") + "{not json\n");
  try {
    parse_jsonl(bad, t);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream unknown(line("u", R"(["A","Q9","Z1"])"));
  try {
    parse_jsonl(unknown, t);
    FAIL("expected LookupError");
  } catch (const LookupError& e) {
    const std::string what = e.what();
    CHECK(what.find("Q9") != std::string::npos);
    CHECK(what.find("Z1") != std::string::npos);
  }
}

TEST_CASE("char-level tokenization splits UTF-8 code points") {
  TokenizerOptions o;
  o.char_level = true;
  const auto toks = tokenize("数据 ab", o);
  CHECK(toks == std::vector<std::string>{"数", "据", "a", "b"});
  TokenizerOptions lower;
  lower.lowercase = true;
  CHECK(tokenize("Ab  C", lower) == std::vector<std::string>{"ab", "c"});
}

TEST_CASE("encoding pads each type to its length and marks the padding") {
  const auto t = testing::small_taxonomy();
  auto p = testing::proposal("p", "k1 k2 k3", {"A"}, "a b");
  const auto v = Vocab::build({p});
  CHECK(v.index("<pad>") == Vocab::kPad);
  CHECK(v.index("never seen") == Vocab::kUnk);
  const DocLengths lengths{4, 2, 5, 3};
  const auto e = encode(p, v, lengths, t);
  for (std::size_t i = 0; i < kDocTypeCount; ++i) {
    CHECK(e.documents[i].ids.size() == lengths[i]);
    for (std::size_t j = 0; j < lengths[i]; ++j) {
      CHECK((e.documents[i].ids[j] == Vocab::kPad) == (j >= e.documents[i].length));
    }
  }
  CHECK(e.documents[1].length == 2);
  CHECK(e.documents[2].length == 2);
  CHECK(e.documents[0].length == 0);
}

TEST_CASE("embedding files: coverage, PAD row, header and width check") {
  Vocab v({"<pad>", "<unk>", "x", "y"});
  Rng rng(1);
  const auto full = temp_file("ipc_emb_full.txt", "2 3\nx 1 2 3\ny 4 5 6\n<pad> 9 9 9\n");
  const auto table = load_embeddings(full, v, 3, rng);
  CHECK(table.covered == 2);
  CHECK(table.values[2 * 3 + 0] == 1.0f);
  CHECK(table.values[3 * 3 + 2] == 6.0f);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(table.values[c] == 0.0f);
  }
  const auto empty = temp_file("ipc_emb_empty.txt", "");
  const auto random = load_embeddings(empty, v, 3, rng);
  CHECK(random.covered == 0);
  CHECK(random.values[0] == 0.0f);
  CHECK(random.values[3] != 0.0f);
  CHECK(std::abs(random.values[3]) < 0.2f);
  const auto wide = temp_file("ipc_emb_wide.txt", "x 1 2 3 4\n");
  CHECK_THROWS_AS(load_embeddings(wide, v, 3, rng), ConfigError);
}

TEST_CASE("synthetic corpora are deterministic and honour their settings") {
  SynthSpec s;
  s.proposals = 50;
  s.level_sizes = {4, 8};
  const auto a = synth_corpus(s);
  const auto b = synth_corpus(s);
  REQUIRE(a.proposals.size() == 50);
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(proposal_to_json(a.proposals[i]) == proposal_to_json(b.proposals[i]));
  }
  CHECK(a.taxonomy.depth() == 2);
  CHECK(a.taxonomy.level_size(1) == 4);

  s.interdisciplinary_rate = 0.0;
  for (const auto& p : synth_corpus(s).proposals) {
    CHECK(codes_to_path_sequence(p.gold_codes, a.taxonomy).sets[1].size() == 1);
  }
  s.interdisciplinary_rate = 1.0;
  for (const auto& p : synth_corpus(s).proposals) {
    CHECK(codes_to_path_sequence(p.gold_codes, a.taxonomy).sets[1].size() >= 2);
  }
  s.level_sizes = {4, 6};
  CHECK_THROWS_AS(synth_corpus(s), ConfigError);
}

TEST_CASE("JSONL write and reload keep proposals intact") {
  SynthSpec s;
  s.proposals = 10;
  const auto c = synth_corpus(s);
  const auto path = std::filesystem::temp_directory_path() / "ipc_corpus_rt.jsonl";
  write_jsonl(path, c.proposals);
  const auto back = load_jsonl(path, c.taxonomy);
  REQUIRE(back.proposals.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(proposal_to_json(back.proposals[i]) == proposal_to_json(c.proposals[i]));
  }
}

TEST_CASE("pretrained embeddings group tokens of the same label") {
  SynthSpec spec;
  spec.seed = 3;
  spec.proposals = 300;
  spec.interdisciplinary_rate = 0.0;
  auto corpus = synth_corpus(spec);
  const auto vocab = Vocab::build(corpus.proposals);
  const std::size_t h = 16;
  Rng a(5), b(5);
  const auto table = pretrain_embeddings(corpus.proposals, vocab, h, a);
  CHECK(table.values == pretrain_embeddings(corpus.proposals, vocab, h, b).values);
  REQUIRE(table.width == h);
  REQUIRE(table.values.size() == vocab.size() * h);
  CHECK(table.covered == vocab.size() - 2);
  for (std::size_t c = 0; c < h; ++c) {
    CHECK(table.values[c] == 0.0f);
  }

  auto row = [&](const std::string& t) {
    const std::size_t r = vocab.index(t);
    REQUIRE(r != Vocab::kUnk);
    return std::vector<double>(table.values.begin() + static_cast<std::ptrdiff_t>(r * h),
                               table.values.begin() + static_cast<std::ptrdiff_t>((r + 1) * h));
  };
  auto cosine = [](const std::vector<double>& x, const std::vector<double>& y) {
    double xy = 0, xx = 0, yy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      xy += x[i] * y[i];
      xx += x[i] * x[i];
      yy += y[i] * y[i];
    }
    return xy / std::sqrt(xx * yy);
  };
  double same = 0.0, other = 0.0;
  for (const std::string top : {"a", "b", "c"}) {
    const std::string far = top == "a" ? "d" : "a";
    same += cosine(row(top + "w0"), row(top + "w1"));
    other += cosine(row(top + "w0"), row(far + "w1"));
  }
  CHECK(same > other + 0.5);

  double norms = 0.0;
  for (std::size_t r = 2; r < vocab.size(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < h; ++c) {
      s += double(table.values[r * h + c]) * table.values[r * h + c];
    }
    norms += std::sqrt(s);
  }
  CHECK(norms / double(vocab.size() - 2) == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("pretraining without data falls back to the random table") {
  Vocab vocab;
  Rng a(9), b(9);
  const auto table = pretrain_embeddings({}, vocab, 4, a);
  CHECK(table.covered == 0);
  CHECK(table.values == random_embeddings(vocab, 4, 1.0, b).values);
}
