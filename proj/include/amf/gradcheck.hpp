#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "amf/autodiff.hpp"

namespace amf {

struct NamedParameter {
  std::string name;
  Var var;
};

struct GradCheckOptions {
  Real step = 1e-5;
  Real tolerance = 1e-4;
  /// Coordinates probed per parameter; 0 probes every coordinate.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 0;  // picks the sampled coordinates
};

struct ParamGradCheck {
  std::string name;
  std::size_t coords_checked = 0;
  Real max_rel_error = 0;
  std::size_t worst_index = 0;
  Real worst_analytic = 0;
  Real worst_numeric = 0;
};

struct GradCheckReport {
  std::vector<ParamGradCheck> params;
  Real max_rel_error = 0;
  bool passed = true;
};

/// Compares reverse-mode gradients with central differences
/// (f(x+h) - f(x-h)) / 2h. Relative error is |a - n| / max(|a|, |n|, 1e-8).
/// `loss_fn` must rebuild the graph from the current parameter values on each call.
GradCheckReport grad_check(const std::function<Var()>& loss_fn, std::vector<NamedParameter> params,
                           const GradCheckOptions& options = {});

std::string format_report(const GradCheckReport& report);

}  // namespace amf
