#include "amf/optim.hpp"

#include <cmath>
#include <string>

#include "amf/errors.hpp"

namespace amf {

void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state) {
  if (params.size() != grads.size()) {
    throw ShapeMismatch("adam_step: " + std::to_string(params.size()) + " parameters but " +
                        std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape() != grads[i].shape()) {
      throw ShapeMismatch("adam_step: parameter " + std::to_string(i) + " has shape " +
                          shape_string(params[i]->shape()) + " but gradient " +
                          shape_string(grads[i].shape()));
    }
    if (!grads[i].all_finite()) {
      throw NonFiniteGradient("adam_step: gradient of parameter " + std::to_string(i) +
                              " is not finite");
    }
  }
  if (state.first_moment.empty()) {
    for (const Tensor* p : params) {
      state.first_moment.emplace_back(p->shape());
      state.second_moment.emplace_back(p->shape());
    }
  } else if (state.first_moment.size() != params.size()) {
    throw ShapeMismatch("adam_step: optimizer state tracks a different parameter list");
  }

  ++state.step;
  const AdamConfig& cfg = state.config;
  const Real t = static_cast<Real>(state.step);
  const Real correction1 = 1 - std::pow(cfg.beta1, t);
  const Real correction2 = 1 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    Tensor& m = state.first_moment[i];
    Tensor& v = state.second_moment[i];
    const Tensor& g = grads[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1 - cfg.beta1) * g[k];
      v[k] = cfg.beta2 * v[k] + (1 - cfg.beta2) * g[k] * g[k];
      const Real m_hat = m[k] / correction1;
      const Real v_hat = v[k] / correction2;
      p[k] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

void adam_step(std::span<Var> params, AdamState& state) {
  std::vector<Tensor*> values;
  std::vector<Tensor> grads;
  values.reserve(params.size());
  grads.reserve(params.size());
  for (auto& p : params) {
    values.push_back(&p.mutable_value());
    grads.push_back(p.grad());
  }
  adam_step(values, grads, state);
}

}  // namespace amf
