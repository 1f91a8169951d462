#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>

#include "ipc/model.hpp"

namespace ipc {

inline constexpr int kCheckpointVersion = 1;

/// One JSON header line (format_version, hyperparameters, seed, params with
/// shapes, vocab, taxonomy, graph), then every parameter as little-endian
/// float32 in header order.
void save_checkpoint(std::ostream& out, const Model<float>& model, std::uint64_t seed);
void save_checkpoint(const std::filesystem::path& path, const Model<float>& model,
                     std::uint64_t seed);

std::unique_ptr<Model<float>> load_checkpoint(std::istream& in);
std::unique_ptr<Model<float>> load_checkpoint(const std::filesystem::path& path);

/// The header of a checkpoint file without reading the weights.
nlohmann::json read_checkpoint_header(const std::filesystem::path& path);

}  // namespace ipc
