#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "amf/attention.hpp"
#include "amf/encoders.hpp"
#include "amf/gradcheck.hpp"
#include "amf/sample.hpp"

namespace amf {

enum class Modality { visual, audio, fused };

std::string_view to_string(Modality m);
/// Accepts "visual", "audio", "fused".
Modality parse_modality(std::string_view name);

struct ModelConfig {
  VisualEncoderConfig visual;
  AudioEncoderConfig audio;
  std::size_t common_dim = 64;  // D_c
  std::size_t heads = 4;        // h
  std::size_t key_dim = 0;      // d_k; 0 means D_c / h
  std::size_t value_dim = 0;    // d_v; 0 means D_c / h
  std::size_t num_classes = 3;  // C

  std::size_t head_key_dim() const;
  std::size_t head_value_dim() const;
  /// Throws InvalidConfig naming the offending field.
  void validate() const;
};

/// Every learnable tensor: encoders, fusion (projections, both attention
/// streams, fused classifier) and the two unimodal heads used by ablations.
class FusionModel {
 public:
  /// Xavier-uniform weights and zero biases drawn from `init_seed`.
  FusionModel(ModelConfig config, std::uint64_t init_seed);
  FusionModel(const FusionModel& other);
  FusionModel& operator=(const FusionModel& other);
  FusionModel(FusionModel&&) noexcept = default;
  FusionModel& operator=(FusionModel&&) noexcept = default;

  const ModelConfig& config() const { return config_; }

  EncoderParams encoders;
  FusionParams fusion;
  Linear visual_head;  // [D_c×C]
  Linear audio_head;   // [D_c×C]

  /// All parameters in a fixed order with stable dotted names.
  std::vector<NamedParameter> named_parameters() const;
  /// Only those reachable from the given modality's forward path.
  std::vector<NamedParameter> named_parameters(Modality modality) const;
  std::vector<Var> parameters(Modality modality) const;

  void zero_grad();
  /// Overwrites values from another model with the same config.
  void copy_values_from(const FusionModel& other);

 private:
  ModelConfig config_;
};

/// Logits [1×C] for one sample.
/// fused: encoders -> projection -> VA and AV attention -> pool + classifier.
/// visual: visual encoder -> projection -> visual head.
/// audio: audio encoder -> projection -> time mean -> audio head.
Var forward(const AVSample& sample, const FusionModel& model, Modality modality);

/// Index of the largest logit; ties go to the lowest index.
std::size_t argmax(const Tensor& logits);
std::size_t predict(const AVSample& sample, const FusionModel& model, Modality modality);

}  // namespace amf
