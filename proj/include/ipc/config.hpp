#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "ipc/corpus.hpp"

namespace ipc {

/// How the directed graph weights become the symmetric GCN adjacency.
enum class AdjacencyMode {
  Mean,  // (e_ab + e_ba) / 2
  Max,   // max(e_ab, e_ba)
  Out,   // e_ab as is; rows follow outgoing edges only
};

struct ModelConfig {
  std::size_t hidden = 64;
  std::size_t heads = 8;
  std::size_t sie_layers = 8;
  std::size_t fusion_layers = 8;
  std::size_t gcn_layers = 1;
  /// Transformer feed-forward inner width as a multiple of hidden.
  std::size_t ffn_mult = 4;
  double dropout = 0.2;
  DocLengths lengths = kDefaultDocLengths;
  /// One vectorization FC per document type shared by all SIE layers.
  bool share_doc_fc = false;
  AdjacencyMode adjacency = AdjacencyMode::Mean;
};

struct TrainConfig {
  double lr = 1e-3;
  double weight_decay = 1e-7;
  std::size_t batch = 512;
  std::size_t warmup = 1000;
  std::size_t epochs = 10;
  std::uint64_t seed = 42;
  bool freeze_embeddings = false;
  /// Without an embedding file, initialize word vectors from corpus
  /// co-occurrence instead of N(0, 1).
  bool pretrain_embeddings = false;
};

struct DecodeConfig {
  double threshold = 0.5;
  /// 0 means the taxonomy depth.
  std::size_t max_depth = 0;
  /// Pick the best label when nothing passes the threshold and no stop fires.
  bool force_nonempty = true;
  /// Drop predicted labels whose parents were not predicted at the level above.
  bool mask_children = false;
};

struct Config {
  std::string profile = "paper";
  ModelConfig model;
  TrainConfig train;
  DecodeConfig decode;

  /// "paper" follows the published hyperparameters; "desk" is sized for a laptop CPU.
  static Config for_profile(const std::string& name);
  /// Applies the keys present in `overrides` on top of `base`; unknown keys
  /// and wrong types raise ConfigError naming the field.
  static Config from_json(const nlohmann::json& overrides, Config base);
  nlohmann::json to_json() const;
  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

}  // namespace ipc
