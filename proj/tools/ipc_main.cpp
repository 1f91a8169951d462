// Command-line front end: synth, build-graph, train, predict, evaluate.
//
// Exit codes: 0 ok, 1 user error (bad input, config or arguments), 2 internal error.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ipc/checkpoint.hpp"
#include "ipc/config.hpp"
#include "ipc/corpus.hpp"
#include "ipc/evaluation.hpp"
#include "ipc/graph.hpp"
#include "ipc/predictor.hpp"
#include "ipc/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ipc::ParseError("cannot open " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ipc::ParseError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) {
    throw ipc::ParseError("cannot write " + path.string());
  }
}

/// Every artifact that cannot carry the config inline gets "<file>.config.json".
void write_sidecar(const fs::path& artifact, const std::string& command, const json& config,
                   const json& inputs) {
  json meta{{"command", command}, {"config", config}, {"inputs", inputs}};
  write_text(artifact.string() + ".config.json", meta.dump(2) + "\n");
}

struct ConfigArgs {
  std::string profile = "desk";
  std::string config_path;

  ipc::Config resolve() const {
    ipc::Config c = ipc::Config::for_profile(profile);
    if (!config_path.empty()) {
      c = ipc::Config::from_json(read_json_file(config_path), c);
    }
    c.validate();
    return c;
  }
};

void add_config_flags(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--profile", args.profile, "Hyperparameter profile")
      ->check(CLI::IsMember({"paper", "desk"}))
      ->capture_default_str();
  cmd->add_option("--config", args.config_path, "JSON file overriding profile values");
}

std::vector<std::string> split_codes(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) {
      out.push_back(item.substr(b, e - b + 1));
    }
  }
  return out;
}

json map_to_json(const ipc::AttentionMap& m) {
  return {{"queries", m.queries}, {"keys", m.keys}, {"weights", m.weights}};
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
  std::string spec_path;
  std::string corpus_out = "corpus.jsonl";
  std::string taxonomy_out = "taxonomy.json";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> proposals;
};

void run_synth(const SynthArgs& a) {
  ipc::SynthSpec spec;
  if (!a.spec_path.empty()) {
    spec = ipc::SynthSpec::from_json(read_json_file(a.spec_path));
  }
  if (a.seed) {
    spec.seed = *a.seed;
  }
  if (a.proposals) {
    spec.proposals = *a.proposals;
  }
  const auto corpus = ipc::synth_corpus(spec);
  ipc::write_jsonl(a.corpus_out, corpus.proposals);
  auto tax = corpus.taxonomy.to_json();
  tax["config"] = {{"synth", spec.to_json()}};
  write_text(a.taxonomy_out, tax.dump(2) + "\n");
  write_sidecar(a.corpus_out, "synth", {{"synth", spec.to_json()}}, json::object());
  std::cerr << "wrote " << corpus.proposals.size() << " proposals over " << corpus.taxonomy.size() - 1
            << " labels\n";
}

// ---- build-graph ------------------------------------------------------------

struct GraphArgs {
  std::string corpus;
  std::string taxonomy;
  std::string out = "graph";
  double alpha = 1.0;
  double beta = 1.0;
  double threshold = 0.0;
  bool gold_only = false;
  bool fold_case = false;
};

void run_build_graph(const GraphArgs& a) {
  const auto tax = ipc::Taxonomy::load(a.taxonomy);
  const auto loaded = ipc::load_jsonl(a.corpus, tax, {});
  for (const auto& s : loaded.skipped) {
    std::cerr << "warning: skipped " << s << "\n";
  }
  if (loaded.proposals.empty()) {
    std::cerr << "warning: corpus is empty; the graph has no edges\n";
  }
  ipc::StatsOptions so;
  so.policy = a.gold_only ? ipc::LevelPolicy::GoldCodesOnly : ipc::LevelPolicy::AllLevels;
  so.fold_case = a.fold_case;
  const auto stats = ipc::collect_stats(loaded.proposals, tax, so);
  const auto graph = ipc::build_graph(stats, {a.alpha, a.beta, a.threshold});
  const json config{{"alpha", a.alpha},
                    {"beta", a.beta},
                    {"threshold", a.threshold},
                    {"gold_only", a.gold_only},
                    {"fold_case", a.fold_case}};
  const fs::path tsv = a.out + ".tsv";
  const fs::path js = a.out + ".json";
  write_text(tsv, graph.to_tsv(tax));
  auto doc = graph.to_json(tax);
  doc["config"] = config;
  write_text(js, doc.dump(2) + "\n");
  write_sidecar(tsv, "build-graph", config, {{"corpus", a.corpus}, {"taxonomy", a.taxonomy}});
  std::cerr << "wrote " << graph.edge_count() << " edges to " << tsv.string() << " and "
            << js.string() << "\n";
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  ConfigArgs cfg;
  std::string corpus;
  std::string taxonomy;
  std::string graph;
  std::string embeddings;
  std::string out = "model.ckpt";
  std::string log;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
};

void run_train(const TrainArgs& a) {
  ipc::Config config = a.cfg.resolve();
  if (a.epochs) {
    config.train.epochs = *a.epochs;
  }
  if (a.seed) {
    config.train.seed = *a.seed;
  }
  config.validate();
  auto tax = ipc::Taxonomy::load(a.taxonomy);
  ipc::LoadOptions lo;
  lo.lengths = config.model.lengths;
  const auto loaded = ipc::load_jsonl(a.corpus, tax, lo);
  for (const auto& s : loaded.skipped) {
    std::cerr << "warning: skipped " << s << "\n";
  }
  if (loaded.proposals.empty()) {
    throw ipc::ConfigError("corpus: no usable proposals in " + a.corpus);
  }
  auto graph = a.graph.empty() ? ipc::build_graph(ipc::collect_stats(loaded.proposals, tax))
                               : ipc::InterGraph::load(a.graph, tax);
  auto vocab = ipc::Vocab::build(loaded.proposals);
  std::optional<ipc::EmbeddingTable> table;
  if (!a.embeddings.empty()) {
    ipc::Rng rng(config.train.seed + 2);
    table = ipc::load_embeddings(a.embeddings, vocab, config.model.hidden, rng);
    std::cerr << "embeddings cover " << table->covered << " of " << vocab.size() << " tokens\n";
  } else if (config.train.pretrain_embeddings) {
    ipc::Rng rng(config.train.seed + 2);
    table = ipc::pretrain_embeddings(loaded.proposals, vocab, config.model.hidden, rng);
    std::cerr << "pretrained embeddings for " << table->covered << " of " << vocab.size() << " tokens\n";
  }
  const auto data = ipc::encode_all(loaded.proposals, vocab, config.model.lengths, tax);
  ipc::Model<float> model(config, std::move(tax), std::move(graph), std::move(vocab),
                          config.train.seed, table ? &*table : nullptr);
  ipc::Trainer trainer(model, config.train);
  const auto start = std::chrono::steady_clock::now();
  trainer.fit(data, config.train.epochs, [&](std::size_t epoch, std::span<const ipc::StepRecord> r) {
    double mean = 0.0;
    for (const auto& s : r) {
      mean += s.loss;
    }
    mean /= static_cast<double>(std::max<std::size_t>(r.size(), 1));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << "epoch " << epoch << " mean loss " << mean << " (" << secs << " s)\n";
  });
  ipc::save_checkpoint(a.out, model, config.train.seed);
  if (!a.log.empty()) {
    std::ofstream log(a.log);
    if (!log) {
      throw ipc::ParseError("cannot write " + a.log);
    }
    ipc::write_loss_csv(log, trainer.history());
    write_sidecar(a.log, "train", config.to_json(), {{"corpus", a.corpus}, {"taxonomy", a.taxonomy}});
  }
  std::cerr << "saved " << a.out << " after " << trainer.steps() << " steps\n";
}

// ---- predict ----------------------------------------------------------------

struct PredictArgs {
  std::string checkpoint;
  std::string corpus;
  std::string out = "predictions.jsonl";
  std::string config_path;
  std::string given_labels;
  std::optional<std::size_t> given_gold_levels;
  std::string dump_attention;
  bool mask_children = false;
  std::optional<double> tau;
  std::optional<std::size_t> max_depth;
  bool probabilities = false;
};

void run_predict(const PredictArgs& a) {
  const auto model = ipc::load_checkpoint(a.checkpoint);
  ipc::Config config = model->config();
  if (!a.config_path.empty()) {
    config = ipc::Config::from_json(read_json_file(a.config_path), config);
    auto before = model->config().to_json();
    auto after = config.to_json();
    for (const char* key : {"tau", "max_depth", "force_nonempty", "mask_children"}) {
      before.erase(key);
      after.erase(key);
    }
    if (before != after) {
      throw ipc::ConfigError("config: only decode fields (tau, max_depth, force_nonempty, "
                             "mask_children) can change at predict time");
    }
  }
  if (a.tau) {
    config.decode.threshold = *a.tau;
  }
  if (a.max_depth) {
    config.decode.max_depth = *a.max_depth;
  }
  config.decode.mask_children = config.decode.mask_children || a.mask_children;
  config.validate();
  const auto& tax = model->taxonomy();
  if (!a.given_labels.empty() && a.given_gold_levels) {
    throw ipc::ConfigError("--given-labels and --given-gold-levels are exclusive");
  }
  std::optional<std::vector<std::vector<ipc::LabelId>>> fixed_prefix;
  if (!a.given_labels.empty()) {
    const auto codes = split_codes(a.given_labels);
    fixed_prefix = ipc::codes_to_path_sequence(codes, tax).sets;
  }
  ipc::LoadOptions lo;
  lo.lengths = config.model.lengths;
  const auto loaded = ipc::load_jsonl(a.corpus, tax, lo);
  for (const auto& s : loaded.skipped) {
    std::cerr << "warning: skipped " << s << "\n";
  }
  std::ofstream out(a.out);
  if (!out) {
    throw ipc::ParseError("cannot write " + a.out);
  }
  json dump = json::array();
  for (const auto& p : loaded.proposals) {
    const auto e = ipc::encode(p, model->vocab(), config.model.lengths, tax);
    std::optional<std::vector<std::vector<ipc::LabelId>>> prefix = fixed_prefix;
    if (a.given_gold_levels && *a.given_gold_levels > 0) {
      const std::size_t n = std::min(*a.given_gold_levels + 1, e.gold.sets.size());
      prefix.emplace(e.gold.sets.begin(), e.gold.sets.begin() + static_cast<std::ptrdiff_t>(n));
    }
    ipc::ForwardTrace trace;
    const bool want_trace = !a.dump_attention.empty();
    const auto pred = ipc::predict_paths(*model, e, config.decode, prefix ? &*prefix : nullptr,
                                         want_trace ? &trace : nullptr);
    out << ipc::prediction_to_json(p.id, pred, tax, a.probabilities).dump() << '\n';
    if (want_trace) {
      json word = json::array();
      for (const auto& layer : trace.sie.word) {
        json per_type = json::object();
        for (std::size_t t = 0; t < ipc::kDocTypeCount; ++t) {
          per_type[std::string(ipc::kDocTypeNames[t])] = map_to_json(layer[t]);
        }
        word.push_back(per_type);
      }
      json doc = json::array();
      for (const auto& m : trace.sie.doc) {
        doc.push_back(map_to_json(m));
      }
      json cross = json::array();
      for (const auto& level : trace.cross) {
        json blocks = json::array();
        for (const auto& m : level) {
          blocks.push_back(map_to_json(m));
        }
        cross.push_back(blocks);
      }
      dump.push_back({{"id", p.id}, {"word", word}, {"doc", doc}, {"fusion_cross", cross}});
    }
  }
  const json inputs{{"checkpoint", a.checkpoint}, {"corpus", a.corpus}, {"given_labels", a.given_labels}};
  write_sidecar(a.out, "predict", config.to_json(), inputs);
  if (!a.dump_attention.empty()) {
    json doc{{"config", config.to_json()},
             {"document_types", ipc::kDocTypeNames},
             {"proposals", dump}};
    write_text(a.dump_attention, doc.dump() + "\n");
  }
  std::cerr << "wrote predictions for " << loaded.proposals.size() << " proposals to " << a.out << "\n";
}

// ---- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  std::string predictions;
  std::string corpus;
  std::string taxonomy;
  std::string out;
  bool include_unseen = false;
};

ipc::LabelPathSequence sequence_from_levels(const json& levels, const ipc::Taxonomy& tax) {
  ipc::LabelPathSequence seq;
  seq.sets.push_back({tax.root()});
  for (const auto& level : levels) {
    std::vector<ipc::LabelId> ids;
    for (const auto& code : level) {
      ids.push_back(tax.id(code.get<std::string>()));
    }
    std::sort(ids.begin(), ids.end());
    seq.sets.push_back(std::move(ids));
  }
  ipc::check_path_sequence(seq, tax, false);
  return seq;
}

void run_evaluate(const EvaluateArgs& a) {
  const auto tax = ipc::Taxonomy::load(a.taxonomy);
  const auto loaded = ipc::load_jsonl(a.corpus, tax, {});
  std::vector<ipc::IdSequence> gold;
  for (const auto& p : loaded.proposals) {
    gold.emplace_back(p.id, ipc::codes_to_path_sequence(p.gold_codes, tax));
  }
  std::vector<ipc::IdSequence> predicted;
  std::ifstream in(a.predictions);
  if (!in) {
    throw ipc::ParseError("cannot open " + a.predictions);
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      const auto rec = json::parse(line);
      predicted.emplace_back(rec.at("id").get<std::string>(), sequence_from_levels(rec.at("levels"), tax));
    } catch (const json::exception& e) {
      throw ipc::ParseError(a.predictions + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  const auto report = ipc::evaluate(ipc::align(predicted, gold), tax, a.include_unseen);
  std::cout << ipc::report_to_text(report);
  if (!a.out.empty()) {
    auto j = ipc::report_to_json(report);
    j["config"] = {{"macro_includes_unseen", a.include_unseen},
                   {"predictions", a.predictions},
                   {"corpus", a.corpus}};
    write_text(a.out, j.dump(2) + "\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical interdisciplinary research proposal classifier"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic corpus and taxonomy");
  cmd_synth->add_option("--spec", synth.spec_path, "Synthetic-spec JSON");
  cmd_synth->add_option("--out-corpus", synth.corpus_out)->capture_default_str();
  cmd_synth->add_option("--out-taxonomy", synth.taxonomy_out)->capture_default_str();
  cmd_synth->add_option("--seed", synth.seed);
  cmd_synth->add_option("--proposals", synth.proposals);

  GraphArgs graph;
  auto* cmd_graph = app.add_subcommand("build-graph", "Build the discipline graph from a corpus");
  cmd_graph->add_option("--corpus", graph.corpus)->required();
  cmd_graph->add_option("--taxonomy", graph.taxonomy)->required();
  cmd_graph->add_option("--out", graph.out, "Output prefix; writes PREFIX.tsv and PREFIX.json")
      ->capture_default_str();
  cmd_graph->add_option("--alpha", graph.alpha)->capture_default_str();
  cmd_graph->add_option("--beta", graph.beta)->capture_default_str();
  cmd_graph->add_option("--threshold", graph.threshold, "Drop edges at or below this weight")
      ->capture_default_str();
  cmd_graph->add_flag("--gold-only", graph.gold_only, "Count keywords only for the gold codes");
  cmd_graph->add_flag("--fold-case", graph.fold_case);

  TrainArgs train;
  auto* cmd_train = app.add_subcommand("train", "Train a model and write a checkpoint");
  add_config_flags(cmd_train, train.cfg);
  cmd_train->add_option("--corpus", train.corpus)->required();
  cmd_train->add_option("--taxonomy", train.taxonomy)->required();
  cmd_train->add_option("--graph", train.graph, "Graph TSV or JSON; built from the corpus if absent");
  cmd_train->add_option("--embeddings", train.embeddings, "word2vec-style text embeddings");
  cmd_train->add_option("--out", train.out)->capture_default_str();
  cmd_train->add_option("--log", train.log, "Loss log CSV (step,loss,lr)");
  cmd_train->add_option("--epochs", train.epochs);
  cmd_train->add_option("--seed", train.seed);

  PredictArgs predict;
  auto* cmd_predict = app.add_subcommand("predict", "Predict label path sequences");
  cmd_predict->add_option("--checkpoint", predict.checkpoint)->required();
  cmd_predict->add_option("--corpus", predict.corpus)->required();
  cmd_predict->add_option("--out", predict.out)->capture_default_str();
  cmd_predict->add_option("--config", predict.config_path, "JSON overriding decode settings");
  cmd_predict->add_option("--given-labels", predict.given_labels,
                          "Comma-separated codes used as the known prefix, e.g. \"F,B\"");
  cmd_predict->add_option("--given-gold-levels", predict.given_gold_levels,
                          "Use each proposal's first N gold levels as the prefix");
  cmd_predict->add_option("--dump-attention", predict.dump_attention, "Attention map JSON");
  cmd_predict->add_flag("--mask-children", predict.mask_children,
                        "Drop labels whose parent was not predicted");
  cmd_predict->add_option("--tau", predict.tau, "Decision threshold");
  cmd_predict->add_option("--max-depth", predict.max_depth);
  cmd_predict->add_flag("--probabilities", predict.probabilities, "Include level probabilities");

  EvaluateArgs eval;
  auto* cmd_eval = app.add_subcommand("evaluate", "Score predictions against gold labels");
  cmd_eval->add_option("--predictions", eval.predictions)->required();
  cmd_eval->add_option("--corpus", eval.corpus)->required();
  cmd_eval->add_option("--taxonomy", eval.taxonomy)->required();
  cmd_eval->add_option("--out", eval.out, "Report JSON");
  cmd_eval->add_flag("--macro-include-unseen", eval.include_unseen,
                     "Count labels absent from both sides as F1 = 0");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*cmd_synth) {
      run_synth(synth);
    } else if (*cmd_graph) {
      run_build_graph(graph);
    } else if (*cmd_train) {
      run_train(train);
    } else if (*cmd_predict) {
      run_predict(predict);
    } else if (*cmd_eval) {
      run_evaluate(eval);
    }
  } catch (const ipc::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ipc::DimensionError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const ipc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
