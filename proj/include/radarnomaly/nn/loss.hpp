#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "radarnomaly/nn/tensor.hpp"

namespace radarnomaly::nn {

/// Probability floor applied before the log in cross-entropy.
inline constexpr double kProbabilityFloor = 1e-12;

/// Max-shifted softmax; stable for large logits.
inline Vector softmax(std::span<const double> z) {
  Vector out(z.size());
  if (z.empty()) return out;
  const double peak = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - peak);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

inline double mse(std::span<const double> pred, std::span<const double> target) {
  require_size(pred.size(), target.size(), "mse operands");
  if (pred.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

/// d mse / d pred
inline Vector mse_gradient(std::span<const double> pred, std::span<const double> target) {
  require_size(pred.size(), target.size(), "mse operands");
  Vector g(pred.size());
  const double scale = 2.0 / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) g[i] = scale * (pred[i] - target[i]);
  return g;
}

/// Sparse categorical cross-entropy of one probability vector.
inline double scce(std::span<const double> probs, std::size_t target) {
  if (target >= probs.size()) throw Error(ErrorKind::index_out_of_range, "scce target index out of range");
  return -std::log(std::max(probs[target], kProbabilityFloor));
}

/// d scce / d logits for probabilities produced by softmax. Zero once the
/// floor is engaged, matching the constant loss there.
inline Vector scce_logit_gradient(std::span<const double> probs, std::size_t target) {
  if (target >= probs.size()) throw Error(ErrorKind::index_out_of_range, "scce target index out of range");
  Vector g(probs.size(), 0.0);
  if (probs[target] < kProbabilityFloor) return g;
  for (std::size_t i = 0; i < probs.size(); ++i) g[i] = probs[i];
  g[target] -= 1.0;
  return g;
}

}  // namespace radarnomaly::nn
