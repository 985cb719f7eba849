#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>

#include "radarnomaly/nn/tensor.hpp"

namespace radarnomaly::nn {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_block = 0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

/// Compares analytic gradients against central differences of `loss`, which
/// must evaluate the objective at the current contents of `params`.
///
/// Relative error is |a - n| / max(|a|, |n|, floor); the floor keeps
/// vanishing gradients from dividing by round-off.
inline GradCheckReport grad_check(std::span<const std::span<double>> params,
                                  std::span<const std::span<double>> analytic,
                                  const std::function<double()>& loss, double step = 1e-4,
                                  double floor = 1e-6) {
  require_size(analytic.size(), params.size(), "grad_check blocks");
  GradCheckReport report;
  for (std::size_t b = 0; b < params.size(); ++b) {
    require_size(analytic[b].size(), params[b].size(), "grad_check block");
    for (std::size_t i = 0; i < params[b].size(); ++i) {
      double& p = params[b][i];
      const double saved = p;
      p = saved + step;
      const double up = loss();
      p = saved - step;
      const double down = loss();
      p = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[b][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.checked;
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_block = b;
        report.worst_index = i;
      }
    }
  }
  return report;
}

}  // namespace radarnomaly::nn
