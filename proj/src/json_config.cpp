#include "amf/json_config.hpp"

#include <string>
#include <type_traits>

#include "amf/errors.hpp"

namespace amf {

void check_known_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                      std::string_view context) {
  if (!obj.is_object()) throw InvalidConfig(std::string(context) + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw InvalidConfig(std::string(context) + ": unknown field '" + key + "'");
  }
}

namespace {

template <class T>
void read_field(const Json& j, const char* key, T& out, std::string_view context) {
  if (!j.contains(key)) return;
  if constexpr (std::is_unsigned_v<T>) {
    if (!j.at(key).is_number_unsigned()) {
      throw InvalidConfig(std::string(context) + "." + key + " must be a non-negative integer");
    }
  }
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidConfig(std::string(context) + "." + key + " has the wrong type");
  }
}

}  // namespace

Json to_json(const ModelConfig& c) {
  Json visual;
  visual["kind"] = c.visual.kind == VisualKind::frames ? "frames" : "features";
  visual["feature_dim"] = c.visual.feature_dim;
  visual["frame_height"] = c.visual.frame_height;
  visual["frame_width"] = c.visual.frame_width;
  visual["conv_channels"] = c.visual.conv_channels;
  visual["kernel_size"] = c.visual.kernel_size;
  visual["output_dim"] = c.visual.output_dim;

  Json layers = Json::array();
  for (const auto& l : c.audio.layers) {
    layers.push_back({{"channels", l.channels}, {"width", l.width}, {"stride", l.stride}});
  }
  Json j;
  j["visual"] = visual;
  j["audio"] = {{"input_dim", c.audio.input_dim}, {"layers", layers}};
  j["common_dim"] = c.common_dim;
  j["heads"] = c.heads;
  j["key_dim"] = c.key_dim;
  j["value_dim"] = c.value_dim;
  j["num_classes"] = c.num_classes;
  return j;
}

ModelConfig model_config_from_json(const Json& j) {
  check_known_keys(j, {"visual", "audio", "common_dim", "heads", "key_dim", "value_dim", "num_classes"},
                   "model");
  ModelConfig c;
  if (j.contains("visual")) {
    const Json& v = j["visual"];
    check_known_keys(v, {"kind", "feature_dim", "frame_height", "frame_width", "conv_channels",
                         "kernel_size", "output_dim"},
                     "model.visual");
    std::string kind = "features";
    read_field(v, "kind", kind, "model.visual");
    if (kind == "frames") {
      c.visual.kind = VisualKind::frames;
    } else if (kind != "features") {
      throw InvalidConfig("model.visual.kind must be 'features' or 'frames', got '" + kind + "'");
    }
    read_field(v, "feature_dim", c.visual.feature_dim, "model.visual");
    read_field(v, "frame_height", c.visual.frame_height, "model.visual");
    read_field(v, "frame_width", c.visual.frame_width, "model.visual");
    read_field(v, "conv_channels", c.visual.conv_channels, "model.visual");
    read_field(v, "kernel_size", c.visual.kernel_size, "model.visual");
    read_field(v, "output_dim", c.visual.output_dim, "model.visual");
  }
  if (j.contains("audio")) {
    const Json& a = j["audio"];
    check_known_keys(a, {"input_dim", "layers"}, "model.audio");
    read_field(a, "input_dim", c.audio.input_dim, "model.audio");
    if (a.contains("layers")) {
      if (!a["layers"].is_array()) throw InvalidConfig("model.audio.layers must be an array");
      c.audio.layers.clear();
      for (const auto& l : a["layers"]) {
        check_known_keys(l, {"channels", "width", "stride"}, "model.audio.layers[]");
        AudioLayerConfig layer;
        read_field(l, "channels", layer.channels, "model.audio.layers[]");
        read_field(l, "width", layer.width, "model.audio.layers[]");
        read_field(l, "stride", layer.stride, "model.audio.layers[]");
        c.audio.layers.push_back(layer);
      }
    }
  }
  read_field(j, "common_dim", c.common_dim, "model");
  read_field(j, "heads", c.heads, "model");
  read_field(j, "key_dim", c.key_dim, "model");
  read_field(j, "value_dim", c.value_dim, "model");
  read_field(j, "num_classes", c.num_classes, "model");
  return c;
}

Json to_json(const TrainConfig& c) {
  Json j;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.adam.learning_rate;
  j["beta1"] = c.adam.beta1;
  j["beta2"] = c.adam.beta2;
  j["epsilon"] = c.adam.epsilon;
  j["class_weights"] = c.class_weights;
  return j;
}

TrainConfig train_config_from_json(const Json& j) {
  check_known_keys(j, {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "epsilon",
                       "class_weights"},
                   "train");
  TrainConfig c;
  read_field(j, "epochs", c.epochs, "train");
  read_field(j, "batch_size", c.batch_size, "train");
  read_field(j, "learning_rate", c.adam.learning_rate, "train");
  read_field(j, "beta1", c.adam.beta1, "train");
  read_field(j, "beta2", c.adam.beta2, "train");
  read_field(j, "epsilon", c.adam.epsilon, "train");
  read_field(j, "class_weights", c.class_weights, "train");
  return c;
}

}  // namespace amf
