#include "ipc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace ipc {

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

namespace {

nlohmann::json header_of(const Model<float>& model, std::uint64_t seed) {
  nlohmann::json h;
  h["format_version"] = kCheckpointVersion;
  h["hyperparameters"] = model.config().to_json();
  h["seed"] = seed;
  auto params = nlohmann::json::array();
  for (const auto& [name, t] : model.params().entries()) {
    params.push_back({{"name", name}, {"shape", t.shape()}});
  }
  h["params"] = params;
  h["vocab"] = model.vocab().tokens();
  h["taxonomy"] = model.taxonomy().to_json();
  h["graph"] = model.graph().to_json(model.taxonomy());
  return h;
}

nlohmann::json parse_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("checkpoint is empty");
  }
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what());
  }
  if (!h.is_object() || h.value("format_version", -1) != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint format");
  }
  return h;
}

}  // namespace

void save_checkpoint(std::ostream& out, const Model<float>& model, std::uint64_t seed) {
  out << header_of(model, seed).dump() << '\n';
  for (const auto& [_, t] : model.params().entries()) {
    const auto data = t.data();
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(float)));
  }
  if (!out) {
    throw Error("failed writing checkpoint");
  }
}

void save_checkpoint(const std::filesystem::path& path, const Model<float>& model,
                     std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ParseError("cannot write checkpoint " + path.string());
  }
  save_checkpoint(out, model, seed);
}

std::unique_ptr<Model<float>> load_checkpoint(std::istream& in) {
  const auto h = parse_header(in);
  std::unique_ptr<Model<float>> model;
  try {
    const Config config = Config::from_json(h.at("hyperparameters"), Config::for_profile(
                                                h.at("hyperparameters").value("profile", "paper")));
    Taxonomy tax = Taxonomy::from_json(h.at("taxonomy"));
    InterGraph graph = InterGraph::from_json(h.at("graph"), tax);
    Vocab vocab(h.at("vocab").get<std::vector<std::string>>());
    model = std::make_unique<Model<float>>(config, std::move(tax), std::move(graph),
                                           std::move(vocab), h.at("seed").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what());
  }
  const auto& entries = model->params().entries();
  const auto& listed = h.at("params");
  if (listed.size() != entries.size()) {
    throw ParseError("checkpoint lists " + std::to_string(listed.size()) + " tensors, model has " +
                     std::to_string(entries.size()));
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto t = entries[i].second;
    if (listed[i].at("name") != entries[i].first ||
        listed[i].at("shape").get<Shape>() != t.shape()) {
      throw ParseError("checkpoint tensor " + listed[i].at("name").get<std::string>() +
                       " does not match the model");
    }
    auto data = t.data();
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
    if (!in) {
      throw ParseError("checkpoint truncated in " + entries[i].first);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError("trailing bytes after checkpoint weights");
  }
  return model;
}

std::unique_ptr<Model<float>> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open checkpoint " + path.string());
  }
  return load_checkpoint(in);
}

nlohmann::json read_checkpoint_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open checkpoint " + path.string());
  }
  return parse_header(in);
}

}  // namespace ipc
