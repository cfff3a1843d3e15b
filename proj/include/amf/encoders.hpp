#pragma once

#include <vector>

#include "amf/autodiff.hpp"
#include "amf/sample.hpp"

namespace amf {

struct Linear {
  Var weight;  // [in×out]
  Var bias;    // [1×out]
};

/// x·W + b, row-wise.
Var apply_linear(const Var& x, const Linear& layer);

struct VisualEncoderConfig {
  VisualKind kind = VisualKind::features;
  std::size_t feature_dim = 64;  // features mode: D_v is the feature width
  // frames mode
  std::size_t frame_height = 0;
  std::size_t frame_width = 0;
  std::size_t conv_channels = 8;
  std::size_t kernel_size = 3;
  std::size_t output_dim = 64;

  std::size_t out_dim() const { return kind == VisualKind::features ? feature_dim : output_dim; }
  void validate() const;
};

struct AudioLayerConfig {
  std::size_t channels = 64;
  std::size_t width = 3;
  std::size_t stride = 1;
};

struct AudioEncoderConfig {
  std::size_t input_dim = 16;  // F_a
  std::vector<AudioLayerConfig> layers{{64, 3, 1}};

  std::size_t out_dim() const { return layers.empty() ? input_dim : layers.back().channels; }
  /// Shortest input sequence that still yields one output step.
  std::size_t min_length() const;
  std::size_t output_length(std::size_t input_length) const;
  void validate() const;
};

/// Frames mode: per-frame conv2d + tanh + spatial mean, mean over frames,
/// then a tanh-activated linear map to D_v. Unused in features mode.
struct VisualEncoder {
  VisualEncoderConfig config;
  Var conv_kernels;  // [C×k×k]
  Var conv_bias;     // [1×C]
  Linear fc;         // [C×D_v]
};

struct ConvLayer {
  Var kernels;  // [F_out×w×F_in]
  Var bias;     // [1×F_out]
  std::size_t stride = 1;
};

/// Stack of valid conv1d + tanh layers; keeps the time axis.
struct AudioEncoder {
  AudioEncoderConfig config;
  std::vector<ConvLayer> layers;
};

struct EncoderParams {
  VisualEncoder visual;
  AudioEncoder audio;
};

/// One global vector per clip: [1×D_v].
Var encode_visual(const VisualInput& input, const VisualEncoder& encoder);
/// Temporal feature sequence: [T'_a×D_a].
Var encode_audio(const AudioInput& input, const AudioEncoder& encoder);

}  // namespace amf
