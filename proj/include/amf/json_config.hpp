#pragma once

#include <initializer_list>
#include <string_view>

#include <json.hpp>

#include "amf/model.hpp"
#include "amf/training.hpp"

namespace amf {

using Json = nlohmann::ordered_json;

/// Rejects any key of `obj` not in `allowed`, naming `context` in the message.
void check_known_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                      std::string_view context);

Json to_json(const ModelConfig& config);
/// Strict: unknown keys raise InvalidConfig. Missing keys keep defaults.
ModelConfig model_config_from_json(const Json& j);

Json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const Json& j);

}  // namespace amf
