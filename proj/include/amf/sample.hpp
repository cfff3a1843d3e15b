#pragma once

#include <optional>
#include <string>

#include "amf/tensor.hpp"

namespace amf {

enum class VisualKind { features, frames };

/// A clip's visual content: either precomputed clip features [1×D_v] or raw
/// grayscale frames [N_f×H×W].
struct VisualInput {
  VisualKind kind = VisualKind::features;
  Tensor data;

  static VisualInput features(Tensor t) { return {VisualKind::features, std::move(t)}; }
  static VisualInput frames(Tensor t) { return {VisualKind::frames, std::move(t)}; }
};

/// Frame-level acoustic features [T_a×F_a].
struct AudioInput {
  Tensor features;
};

/// One micro-expression instance. Either modality may be absent; paths that
/// need it raise MissingModality.
struct AVSample {
  std::string clip_id;
  std::string subject_id;
  std::optional<VisualInput> visual;
  std::optional<AudioInput> audio;
  std::size_t label = 0;
  std::string label_name;
};

}  // namespace amf
