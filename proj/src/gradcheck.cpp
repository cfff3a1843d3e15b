#include "amf/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "amf/random.hpp"

namespace amf {

GradCheckReport grad_check(const std::function<Var()>& loss_fn, std::vector<NamedParameter> params,
                           const GradCheckOptions& options) {
  for (auto& p : params) p.var.zero_grad();
  backward(loss_fn());
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) analytic.push_back(p.var.grad());

  Rng rng(derive_seed(options.seed, "gradcheck"));
  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& value = params[k].var.mutable_value();
    std::vector<std::size_t> coords(value.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (options.max_coords_per_param && coords.size() > options.max_coords_per_param) {
      rng.shuffle(coords);
      coords.resize(options.max_coords_per_param);
      std::sort(coords.begin(), coords.end());
    }

    ParamGradCheck entry{params[k].name, coords.size()};
    for (std::size_t i : coords) {
      const Real saved = value[i];
      value[i] = saved + options.step;
      const Real plus = loss_fn().item();
      value[i] = saved - options.step;
      const Real minus = loss_fn().item();
      value[i] = saved;

      const Real numeric = (plus - minus) / (2 * options.step);
      const Real a = analytic[k][i];
      const Real denom = std::max({std::abs(a), std::abs(numeric), Real(1e-8)});
      const Real rel = std::abs(a - numeric) / denom;
      if (rel >= entry.max_rel_error) {
        entry.max_rel_error = rel;
        entry.worst_index = i;
        entry.worst_analytic = a;
        entry.worst_numeric = numeric;
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.params.push_back(std::move(entry));
  }
  for (auto& p : params) p.var.zero_grad();
  report.passed = report.max_rel_error < options.tolerance;
  return report;
}

std::string format_report(const GradCheckReport& report) {
  std::string out;
  char line[256];
  for (const auto& p : report.params) {
    std::snprintf(line, sizeof line, "%-32s coords=%-5zu max_rel=%.3e (analytic %.6e, numeric %.6e)\n",
                  p.name.c_str(), p.coords_checked, p.max_rel_error, p.worst_analytic,
                  p.worst_numeric);
    out += line;
  }
  std::snprintf(line, sizeof line, "overall max_rel=%.3e -> %s\n", report.max_rel_error,
                report.passed ? "PASS" : "FAIL");
  return out + line;
}

}  // namespace amf
