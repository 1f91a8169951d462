#include "ipc/config.hpp"

#include "ipc/errors.hpp"

namespace ipc {

namespace {

const char* adjacency_name(AdjacencyMode m) {
  switch (m) {
    case AdjacencyMode::Mean:
      return "mean";
    case AdjacencyMode::Max:
      return "max";
    case AdjacencyMode::Out:
      return "out";
  }
  return "mean";
}

AdjacencyMode parse_adjacency(const std::string& s) {
  if (s == "mean") {
    return AdjacencyMode::Mean;
  }
  if (s == "max") {
    return AdjacencyMode::Max;
  }
  if (s == "out") {
    return AdjacencyMode::Out;
  }
  throw ConfigError("adjacency: expected mean|max|out, got " + s);
}

template <typename V>
void read(const nlohmann::json& j, const std::string& key, V& out) {
  try {
    out = j.get<V>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(key + ": wrong type (" + j.dump() + ")");
  }
}

}  // namespace

Config Config::for_profile(const std::string& name) {
  Config c;
  if (name == "paper") {
    c.profile = name;
    return c;
  }
  if (name == "desk") {
    c.profile = name;
    c.model.hidden = 32;
    c.model.heads = 4;
    c.model.sie_layers = 2;
    c.model.fusion_layers = 2;
    c.model.lengths = {16, 16, 64, 16};
    c.model.dropout = 0.1;
    c.model.share_doc_fc = true;
    c.train.lr = 2e-3;
    c.train.batch = 32;
    c.train.warmup = 100;
    c.train.epochs = 20;
    c.train.pretrain_embeddings = true;
    return c;
  }
  throw ConfigError("profile: expected paper|desk, got " + name);
}

Config Config::from_json(const nlohmann::json& overrides, Config c) {
  if (!overrides.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  for (const auto& [key, v] : overrides.items()) {
    if (key == "profile") {
      read(v, key, c.profile);
    } else if (key == "h" || key == "hidden") {
      read(v, key, c.model.hidden);
    } else if (key == "heads") {
      read(v, key, c.model.heads);
    } else if (key == "n_e" || key == "sie_layers") {
      read(v, key, c.model.sie_layers);
    } else if (key == "n_d" || key == "fusion_layers") {
      read(v, key, c.model.fusion_layers);
    } else if (key == "n_g" || key == "gcn_layers") {
      read(v, key, c.model.gcn_layers);
    } else if (key == "ffn_mult") {
      read(v, key, c.model.ffn_mult);
    } else if (key == "dropout") {
      read(v, key, c.model.dropout);
    } else if (key == "share_doc_fc") {
      read(v, key, c.model.share_doc_fc);
    } else if (key == "adjacency") {
      std::string s;
      read(v, key, s);
      c.model.adjacency = parse_adjacency(s);
    } else if (key == "lengths") {
      if (!v.is_object()) {
        throw ConfigError("lengths: expected an object keyed by document type");
      }
      for (const auto& [doc, len] : v.items()) {
        bool known = false;
        for (std::size_t t = 0; t < kDocTypeCount; ++t) {
          if (doc == kDocTypeNames[t]) {
            read(len, "lengths." + doc, c.model.lengths[t]);
            known = true;
          }
        }
        if (!known) {
          throw ConfigError("lengths." + doc + ": unknown document type");
        }
      }
    } else if (key == "lr") {
      read(v, key, c.train.lr);
    } else if (key == "weight_decay") {
      read(v, key, c.train.weight_decay);
    } else if (key == "batch") {
      read(v, key, c.train.batch);
    } else if (key == "warmup") {
      read(v, key, c.train.warmup);
    } else if (key == "epochs") {
      read(v, key, c.train.epochs);
    } else if (key == "seed") {
      read(v, key, c.train.seed);
    } else if (key == "freeze_embeddings") {
      read(v, key, c.train.freeze_embeddings);
    } else if (key == "pretrain_embeddings") {
      read(v, key, c.train.pretrain_embeddings);
    } else if (key == "tau" || key == "threshold") {
      read(v, key, c.decode.threshold);
    } else if (key == "max_depth") {
      read(v, key, c.decode.max_depth);
    } else if (key == "force_nonempty") {
      read(v, key, c.decode.force_nonempty);
    } else if (key == "mask_children") {
      read(v, key, c.decode.mask_children);
    } else {
      throw ConfigError(key + ": unknown config field");
    }
  }
  return c;
}

nlohmann::json Config::to_json() const {
  nlohmann::json lengths_json;
  for (std::size_t t = 0; t < kDocTypeCount; ++t) {
    lengths_json[std::string(kDocTypeNames[t])] = model.lengths[t];
  }
  return {{"profile", profile},
          {"h", model.hidden},
          {"heads", model.heads},
          {"n_e", model.sie_layers},
          {"n_d", model.fusion_layers},
          {"n_g", model.gcn_layers},
          {"ffn_mult", model.ffn_mult},
          {"dropout", model.dropout},
          {"share_doc_fc", model.share_doc_fc},
          {"adjacency", adjacency_name(model.adjacency)},
          {"lengths", lengths_json},
          {"lr", train.lr},
          {"weight_decay", train.weight_decay},
          {"batch", train.batch},
          {"warmup", train.warmup},
          {"epochs", train.epochs},
          {"seed", train.seed},
          {"freeze_embeddings", train.freeze_embeddings},
          {"pretrain_embeddings", train.pretrain_embeddings},
          {"tau", decode.threshold},
          {"max_depth", decode.max_depth},
          {"force_nonempty", decode.force_nonempty},
          {"mask_children", decode.mask_children}};
}

void Config::validate() const {
  auto positive = [](std::size_t v, const char* field) {
    if (v == 0) {
      throw ConfigError(std::string(field) + ": must be positive");
    }
  };
  positive(model.hidden, "h");
  positive(model.heads, "heads");
  positive(model.sie_layers, "n_e");
  positive(model.fusion_layers, "n_d");
  positive(model.gcn_layers, "n_g");
  positive(model.ffn_mult, "ffn_mult");
  positive(train.batch, "batch");
  positive(train.epochs, "epochs");
  for (std::size_t t = 0; t < kDocTypeCount; ++t) {
    if (model.lengths[t] == 0) {
      throw ConfigError("lengths." + std::string(kDocTypeNames[t]) + ": must be positive");
    }
  }
  if (model.hidden % model.heads != 0) {
    throw ConfigError("heads: h=" + std::to_string(model.hidden) + " is not divisible by heads=" +
                      std::to_string(model.heads));
  }
  if (model.hidden % 2 != 0) {
    throw ConfigError("h: must be even for the sinusoidal positional encoding");
  }
  if (!(model.dropout >= 0.0 && model.dropout < 1.0)) {
    throw ConfigError("dropout: must lie in [0, 1)");
  }
  if (!(train.lr > 0.0)) {
    throw ConfigError("lr: must be positive");
  }
  if (!(train.weight_decay >= 0.0)) {
    throw ConfigError("weight_decay: must be nonnegative");
  }
  if (!(decode.threshold > 0.0 && decode.threshold < 1.0)) {
    throw ConfigError("tau: must lie in (0, 1)");
  }
}

}  // namespace ipc
