#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "radarnomaly/nn/tensor.hpp"

namespace radarnomaly::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<Vector> first_moment;
  std::vector<Vector> second_moment;

  AdamState() = default;
  explicit AdamState(AdamConfig c) : config(c) {}
};

/// One bias-corrected Adam update. Moment buffers are sized on the first call
/// and must keep matching the parameter layout afterwards.
inline void adam_step(AdamState& state, std::span<const std::span<double>> params,
                      std::span<const std::span<double>> grads) {
  require_size(grads.size(), params.size(), "adam gradient blocks");
  if (state.first_moment.empty() && state.step == 0) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.size(), 0.0);
      state.second_moment.emplace_back(p.size(), 0.0);
    }
  }
  require_size(state.first_moment.size(), params.size(), "adam moment blocks");
  for (std::size_t b = 0; b < params.size(); ++b) {
    require_size(grads[b].size(), params[b].size(), "adam gradient block");
    require_size(state.first_moment[b].size(), params[b].size(), "adam moment block");
  }

  ++state.step;
  const auto& c = state.config;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto& m = state.first_moment[b];
    auto& v = state.second_moment[b];
    const auto p = params[b];
    const auto g = grads[b];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace radarnomaly::nn
