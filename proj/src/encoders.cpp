#include "amf/encoders.hpp"

#include <string>

#include "amf/errors.hpp"

namespace amf {

Var apply_linear(const Var& x, const Linear& layer) {
  return add_row_bias(matmul(x, layer.weight), layer.bias);
}

void VisualEncoderConfig::validate() const {
  if (kind == VisualKind::features) {
    if (feature_dim == 0) throw InvalidConfig("visual feature_dim must be positive");
    return;
  }
  if (frame_height < 8 || frame_width < 8) {
    throw InvalidConfig("visual frames must be at least 8x8, got " + std::to_string(frame_height) +
                        "x" + std::to_string(frame_width));
  }
  if (conv_channels == 0 || output_dim == 0) {
    throw InvalidConfig("visual conv_channels and output_dim must be positive");
  }
  if (kernel_size == 0 || kernel_size > frame_height || kernel_size > frame_width) {
    throw InvalidConfig("visual kernel_size must be in [1, frame size]");
  }
}

std::size_t AudioEncoderConfig::min_length() const {
  std::size_t needed = 1;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    needed = (needed - 1) * it->stride + it->width;
  }
  return needed;
}

std::size_t AudioEncoderConfig::output_length(std::size_t input_length) const {
  std::size_t length = input_length;
  for (const auto& layer : layers) length = conv1d_output_length(length, layer.width, layer.stride);
  return length;
}

void AudioEncoderConfig::validate() const {
  if (input_dim == 0) throw InvalidConfig("audio input_dim must be positive");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.channels == 0 || l.width == 0 || l.stride == 0) {
      throw InvalidConfig("audio layer " + std::to_string(i) +
                          ": channels, width and stride must be positive");
    }
  }
}

Var encode_visual(const VisualInput& input, const VisualEncoder& encoder) {
  const VisualEncoderConfig& cfg = encoder.config;
  const Tensor& data = input.data;
  if (input.kind != cfg.kind) {
    throw BadFrameGeometry(std::string("visual input is ") +
                           (input.kind == VisualKind::frames ? "frames" : "features") +
                           " but the encoder expects " +
                           (cfg.kind == VisualKind::frames ? "frames" : "features"));
  }
  if (cfg.kind == VisualKind::features) {
    if (data.rank() != 2 || data.rows() != 1 || data.cols() != cfg.feature_dim) {
      throw ShapeMismatch("visual features must be 1x" + std::to_string(cfg.feature_dim) +
                          ", got " + shape_string(data.shape()));
    }
    return Var::constant(data);
  }

  if (data.rank() != 3 || data.shape()[0] < 2 || data.shape()[1] != cfg.frame_height ||
      data.shape()[2] != cfg.frame_width) {
    throw BadFrameGeometry("visual frames must be N_f x " + std::to_string(cfg.frame_height) +
                           " x " + std::to_string(cfg.frame_width) +
                           " with N_f >= 2, got " + shape_string(data.shape()));
  }
  const std::size_t n_frames = data.shape()[0];
  const std::size_t pixels = cfg.frame_height * cfg.frame_width;
  std::vector<Var> pooled;
  pooled.reserve(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    std::vector<Real> pix(data.data().begin() + f * pixels, data.data().begin() + (f + 1) * pixels);
    Var frame = Var::constant(Tensor({cfg.frame_height, cfg.frame_width}, std::move(pix)));
    Var maps = tanh(add_row_bias(conv2d(frame, encoder.conv_kernels), encoder.conv_bias));
    pooled.push_back(mean_pool_time(maps));
  }
  return tanh(apply_linear(mean_of(pooled), encoder.fc));
}

Var encode_audio(const AudioInput& input, const AudioEncoder& encoder) {
  const AudioEncoderConfig& cfg = encoder.config;
  const Tensor& x = input.features;
  if (x.rank() != 2 || x.cols() != cfg.input_dim) {
    throw ShapeMismatch("audio features must be T_a x " + std::to_string(cfg.input_dim) +
                        ", got " + shape_string(x.shape()));
  }
  const std::size_t needed = cfg.min_length();
  if (x.rows() < needed) {
    throw SequenceTooShort("audio sequence has " + std::to_string(x.rows()) +
                           " steps; the encoder needs at least " + std::to_string(needed));
  }
  Var h = Var::constant(x);
  for (const auto& layer : encoder.layers) {
    h = tanh(add_row_bias(conv1d(h, layer.kernels, layer.stride), layer.bias));
  }
  return h;
}

}  // namespace amf
