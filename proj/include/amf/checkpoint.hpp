#pragma once

#include <filesystem>

#include "amf/model.hpp"

namespace amf {

/// Binary container: config plus every named parameter, bit-exact float64.
void save_checkpoint(const std::filesystem::path& path, const FusionModel& model);
FusionModel load_checkpoint(const std::filesystem::path& path);

}  // namespace amf
