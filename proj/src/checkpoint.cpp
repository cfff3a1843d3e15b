#include "amf/checkpoint.hpp"

#include "amf/binary_io.hpp"
#include "amf/errors.hpp"

namespace amf {

namespace {
constexpr int kCheckpointVersion = 1;
}

void save_checkpoint(const std::filesystem::path& path, const FusionModel& model) {
  Json header;
  header["version"] = kCheckpointVersion;
  header["dtype"] = "f64";
  header["endian"] = "little";
  header["config"] = to_json(model.config());
  Json tensors = Json::array();
  std::vector<Real> payload;
  for (const auto& p : model.named_parameters()) {
    tensors.push_back({{"name", p.name}, {"shape", p.var.shape()}});
    const auto values = p.var.value().data();
    payload.insert(payload.end(), values.begin(), values.end());
  }
  header["tensors"] = tensors;
  write_headered_file(path, "AMFCKPT", header, payload);
}

FusionModel load_checkpoint(const std::filesystem::path& path) {
  const std::string where = "'" + path.string() + "'";
  HeaderedFile file = read_headered_file(path, "AMFCKPT", [&](const Json& h) {
    if (!h.is_object() || h.value("version", -1) != kCheckpointVersion) {
      throw UnknownVersion(where + ": unsupported checkpoint version");
    }
    if (!h.contains("tensors") || !h["tensors"].is_array()) {
      throw CorruptCheckpoint(where + ": missing tensor table");
    }
    std::size_t total = 0;
    for (const auto& t : h["tensors"]) {
      Shape shape = t.at("shape").get<Shape>();
      total += shape_size(shape);
    }
    return total;
  });

  FusionModel model(model_config_from_json(file.header.at("config")), 0);
  auto params = model.named_parameters();
  const Json& table = file.header["tensors"];
  if (table.size() != params.size()) {
    throw CorruptCheckpoint(where + ": expected " + std::to_string(params.size()) +
                            " tensors, found " + std::to_string(table.size()));
  }
  std::size_t offset = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto name = table[i].at("name").get<std::string>();
    const auto shape = table[i].at("shape").get<Shape>();
    if (name != params[i].name || shape != params[i].var.shape()) {
      throw CorruptCheckpoint(where + ": tensor " + std::to_string(i) + " is " + name +
                              shape_string(shape) + ", config implies " + params[i].name +
                              shape_string(params[i].var.shape()));
    }
    Tensor& value = params[i].var.mutable_value();
    std::copy_n(file.payload.begin() + static_cast<std::ptrdiff_t>(offset), value.size(),
                value.data().begin());
    offset += value.size();
  }
  return model;
}

}  // namespace amf
