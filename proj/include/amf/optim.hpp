#pragma once

#include <span>
#include <vector>

#include "amf/autodiff.hpp"
#include "amf/tensor.hpp"

namespace amf {

struct AdamConfig {
  Real learning_rate = 1e-3;
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real epsilon = 1e-8;
};

/// Adaptive-moment state. Moments are allocated lazily on the first step to
/// mirror the parameter shapes.
struct AdamState {
  AdamConfig config;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::size_t step = 0;
};

/// One bias-corrected adaptive-moment update in place.
/// Throws NonFiniteGradient before touching anything if a gradient holds NaN/Inf.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state);

/// Convenience overload: reads each parameter's accumulated gradient.
void adam_step(std::span<Var> params, AdamState& state);

}  // namespace amf
