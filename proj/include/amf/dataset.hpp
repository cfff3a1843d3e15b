#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "amf/sample.hpp"

namespace amf {

inline constexpr int kManifestVersion = 1;

/// Declared per-dataset geometry of the visual modality.
struct VisualSpec {
  VisualKind kind = VisualKind::features;
  std::size_t feature_dim = 0;   // features
  std::size_t frame_height = 0;  // frames
  std::size_t frame_width = 0;
};

struct Dataset {
  std::vector<std::string> class_names;  // label i is class_names[i]
  VisualSpec visual;
  std::size_t audio_dim = 0;  // F_a
  std::vector<AVSample> samples;
};

/// Writes `<dir>/manifest.json` plus one feature file per present modality
/// under `<dir>/visual/` and `<dir>/audio/`.
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset);

/// Reads and validates a manifest and all referenced feature files. Fails
/// atomically: MissingFile, DimMismatch, UnknownVersion, BadLabel or
/// MalformedFile, each naming the offending entry.
Dataset load_manifest(const std::filesystem::path& manifest_path);

/// Keeps samples whose class is in `names` and renumbers labels in that order.
Dataset select_classes(const Dataset& dataset, const std::vector<std::string>& names);

struct ClassDistribution {
  std::vector<std::string> class_names;
  std::vector<std::size_t> counts;
  std::vector<double> fractions;
  std::size_t total = 0;
};

ClassDistribution class_distribution(std::span<const AVSample> samples,
                                     const std::vector<std::string>& class_names);
std::string format_distribution(const ClassDistribution& dist);

}  // namespace amf
