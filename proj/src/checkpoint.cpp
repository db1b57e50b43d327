#include "csuda/checkpoint.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace csuda {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'C', 'S', 'U', 'D', 'A', 'C', 'K', '1'};

json shape_to_json(const NetworkShape& s) {
  return json{{"in_channels", s.in_channels}, {"in_height", s.in_height},   {"in_width", s.in_width},
              {"block_channels", s.block_channels}, {"num_classes", s.num_classes}, {"kernel", s.kernel},
              {"stride", s.stride}};
}

NetworkShape shape_from_json(const json& j) {
  NetworkShape s;
  s.in_channels = j.at("in_channels");
  s.in_height = j.at("in_height");
  s.in_width = j.at("in_width");
  s.block_channels = j.at("block_channels").get<std::vector<int>>();
  s.num_classes = j.at("num_classes");
  s.kernel = j.at("kernel");
  s.stride = j.at("stride");
  return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, Network<float>& model, const CheckpointMeta& meta) {
  auto tensors = model.state_tensors();
  json dir = json::array();
  std::uint64_t offset = 0;
  for (const auto& t : tensors) {
    const std::uint64_t bytes = sizeof(float) * static_cast<std::uint64_t>(t.value->size());
    dir.push_back({{"name", t.path},
                   {"rows", t.value->rows()},
                   {"cols", t.value->cols()},
                   {"dtype", "f32"},
                   {"offset", offset},
                   {"bytes", bytes}});
    offset += bytes;
  }
  json header = {{"schema_version", 1},
                 {"arch", model.arch_id()},
                 {"num_classes", model.num_classes()},
                 {"shape", shape_to_json(model.shape())},
                 {"metadata",
                  {{"epochs", meta.epochs},
                   {"seed", meta.seed},
                   {"source_test_accuracy", meta.source_test_accuracy}}},
                 {"tensors", dir}};
  const std::string hs = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t hlen = hs.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto& t : tensors)
    out.write(reinterpret_cast<const char*>(t.value->data()),
              static_cast<std::streamsize>(sizeof(float) * t.value->size()));
  if (!out) throw std::runtime_error("checkpoint write failed: " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a checkpoint file: " + path.string());
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string hs(hlen, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(hlen));
  const json header = json::parse(hs);

  if (header.at("schema_version").get<int>() != 1)
    throw std::runtime_error("unsupported checkpoint schema version");

  LoadedCheckpoint loaded;
  loaded.arch_id = header.at("arch").get<std::string>();
  const NetworkShape shape = shape_from_json(header.at("shape"));
  loaded.model = Network<float>(shape, /*seed=*/0);
  if (loaded.model.arch_id() != loaded.arch_id)
    throw std::runtime_error("architecture identifier mismatch: file says '" + loaded.arch_id +
                             "', shape reconstructs '" + loaded.model.arch_id() + "'");

  const auto& md = header.at("metadata");
  loaded.meta.epochs = md.at("epochs");
  loaded.meta.seed = md.at("seed");
  loaded.meta.source_test_accuracy = md.value("source_test_accuracy", -1.0);

  auto tensors = loaded.model.state_tensors();
  const auto& dir = header.at("tensors");
  if (dir.size() != tensors.size()) throw std::runtime_error("checkpoint tensor directory size mismatch");
  const std::streampos data_start = in.tellg();
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto& e = dir.at(i);
    if (e.at("name").get<std::string>() != tensors[i].path)
      throw std::runtime_error("unexpected tensor path '" + e.at("name").get<std::string>() +
                               "' (want '" + tensors[i].path + "')");
    const Eigen::Index rows = e.at("rows"), cols = e.at("cols");
    if (rows != tensors[i].value->rows() || cols != tensors[i].value->cols())
      throw std::runtime_error("tensor shape mismatch for " + tensors[i].path);
    in.seekg(data_start + static_cast<std::streamoff>(e.at("offset").get<std::uint64_t>()));
    in.read(reinterpret_cast<char*>(tensors[i].value->data()),
            static_cast<std::streamsize>(e.at("bytes").get<std::uint64_t>()));
  }
  if (!in) throw std::runtime_error("truncated checkpoint: " + path.string());
  return loaded;
}

}  // namespace csuda
