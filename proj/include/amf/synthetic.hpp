#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "amf/annotation.hpp"
#include "amf/dataset.hpp"
#include "amf/json_config.hpp"

namespace amf {

/// Recipe for a seeded audio-visual dataset whose class signal is split across
/// modalities. Classes sharing a group id in a modality get the same template
/// there, so they are indistinguishable in that modality alone.
struct SyntheticSpec {
  std::size_t subjects = 10;
  std::size_t samples_per_subject = 12;
  std::vector<std::string> class_names{"Positive", "Negative", "Surprise"};
  std::vector<double> class_weights{1.0 / 3, 1.0 / 3, 1.0 / 3};
  // Default split: visual separates {0} | {1,2}; audio separates {0,1} | {2}.
  std::vector<std::size_t> visual_groups{0, 1, 1};
  std::vector<std::size_t> audio_groups{0, 0, 1};

  VisualKind visual_kind = VisualKind::features;
  std::size_t visual_dim = 16;
  std::size_t frames = 4;
  std::size_t frame_height = 8;
  std::size_t frame_width = 8;

  std::size_t audio_steps = 16;  // T_a
  std::size_t audio_dim = 8;     // F_a

  double visual_signal = 1.0;  // per-coordinate template scale
  double audio_signal = 1.0;
  double noise = 0.5;          // per-coordinate Gaussian noise
  double subject_shift = 0.3;  // per-subject offset scale, shared by all of a subject's clips

  std::uint64_t seed = 0;

  /// Throws InvalidSpec naming the field.
  void validate() const;
};

Json to_json(const SyntheticSpec& spec);
/// Strict parse; unknown fields and bad types raise InvalidSpec. `seed` is
/// optional here and left at 0 when absent.
SyntheticSpec synthetic_spec_from_json(const Json& j);

struct SyntheticDataset {
  Dataset dataset;
  std::vector<AnnotationRecord> annotations;  // one plausible record per clip
};

/// Pure function of `spec`, seed included.
SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

/// generate_synthetic + write_dataset + `annotations.jsonl`. Validates first,
/// so an invalid spec writes nothing.
SyntheticDataset synthesize_dataset(const SyntheticSpec& spec, const std::filesystem::path& dir);

}  // namespace amf
