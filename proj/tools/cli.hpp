#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "amf/evaluation.hpp"

namespace amf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;  // bad arguments, config, or input files
inline constexpr int kExitRuntime = 3;  // failures after validation passed

/// An experiment config with every model field the dataset determines filled in.
struct Experiment {
  Json resolved;
  Dataset data;
  EvalConfig eval;
};

/// Reads a config with sections data (manifest path or synthetic spec),
/// optional classes, model, train and gradcheck. A synthetic spec without its
/// own seed gets one derived from `seed`.
Experiment load_experiment(const std::filesystem::path& config_path,
                           const std::optional<std::uint64_t>& seed);

/// Runs one command line (without the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace amf::cli
