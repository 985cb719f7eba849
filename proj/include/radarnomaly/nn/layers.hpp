#pragma once

// Dense, embedding and LSTM layers with exact reverse-mode gradients.
//
// Gradient buffers have the same type as the layer they belong to, so a
// `DenseLayer` doubles as the accumulator for its own parameter gradients.

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "radarnomaly/nn/tensor.hpp"

namespace radarnomaly::nn {

using Rng = std::mt19937_64;

enum class Activation { linear, sigmoid };

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Gain used for sigmoid layers; the normalized range is four times wider
/// than for tanh because sigmoid'(0) = 1/4.
inline constexpr double kSigmoidGain = 4.0;

inline void glorot_fill(std::span<double> values, std::size_t fan_in, std::size_t fan_out, Rng& rng,
                        double gain = 1.0) {
  const double limit = gain * std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : values) v = dist(rng);
}

// ---------------------------------------------------------------------------
// Dense

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;
  Activation activation = Activation::linear;

  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out, Activation act) : weights(out, in), bias(out, 0.0), activation(act) {}

  static DenseLayer glorot(std::size_t in, std::size_t out, Activation act, Rng& rng, double gain = 1.0) {
    DenseLayer layer(in, out, act);
    glorot_fill(layer.weights.data, in, out, rng, gain);
    return layer;
  }

  std::size_t input_size() const { return weights.cols; }
  std::size_t output_size() const { return weights.rows; }

  DenseLayer zeros_like() const { return DenseLayer(input_size(), output_size(), activation); }

  std::vector<std::span<double>> parameters() { return {weights.data, bias}; }

  bool operator==(const DenseLayer&) const = default;
};

inline Vector dense_forward(const DenseLayer& layer, std::span<const double> x) {
  require_size(x.size(), layer.input_size(), "dense input");
  Vector y(layer.bias);
  gemv_accumulate(layer.weights, x, y);
  if (layer.activation == Activation::sigmoid) {
    for (double& v : y) v = sigmoid(v);
  }
  return y;
}

/// Given dL/dy, accumulates dL/dW and dL/db into `grad` and returns dL/dx.
/// `y` is the forward output for `x`.
inline Vector dense_backward(const DenseLayer& layer, std::span<const double> x, std::span<const double> y,
                             std::span<const double> dy, DenseLayer& grad) {
  require_size(x.size(), layer.input_size(), "dense input");
  require_size(dy.size(), layer.output_size(), "dense output gradient");
  Vector dz(dy.begin(), dy.end());
  if (layer.activation == Activation::sigmoid) {
    require_size(y.size(), layer.output_size(), "dense output");
    for (std::size_t i = 0; i < dz.size(); ++i) dz[i] *= y[i] * (1.0 - y[i]);
  }
  outer_accumulate(dz, x, grad.weights);
  for (std::size_t i = 0; i < dz.size(); ++i) grad.bias[i] += dz[i];
  Vector dx(layer.input_size(), 0.0);
  gemv_transposed_accumulate(layer.weights, dz, dx);
  return dx;
}

// ---------------------------------------------------------------------------
// Embedding: one scalar per categorical value.

struct EmbeddingLayer {
  std::vector<Vector> tables;

  EmbeddingLayer() = default;
  explicit EmbeddingLayer(std::span<const int> cardinalities) {
    for (int card : cardinalities) tables.emplace_back(static_cast<std::size_t>(card), 0.0);
  }

  static EmbeddingLayer glorot(std::span<const int> cardinalities, Rng& rng) {
    EmbeddingLayer layer(cardinalities);
    for (auto& t : layer.tables) glorot_fill(t, t.size(), 1, rng);
    return layer;
  }

  EmbeddingLayer zeros_like() const {
    EmbeddingLayer out;
    for (const auto& t : tables) out.tables.emplace_back(t.size(), 0.0);
    return out;
  }

  std::vector<std::span<double>> parameters() {
    std::vector<std::span<double>> out;
    for (auto& t : tables) out.emplace_back(t);
    return out;
  }

  bool operator==(const EmbeddingLayer&) const = default;
};

inline Vector embed(const EmbeddingLayer& layer, std::span<const int> values) {
  require_size(values.size(), layer.tables.size(), "embedding input");
  Vector out(values.size());
  for (std::size_t f = 0; f < values.size(); ++f) {
    const auto v = static_cast<std::size_t>(values[f]);
    if (values[f] < 0 || v >= layer.tables[f].size()) {
      throw Error(ErrorKind::index_out_of_range, "embedding index out of range");
    }
    out[f] = layer.tables[f][v];
  }
  return out;
}

inline void embedding_backward(std::span<const int> values, std::span<const double> dy, EmbeddingLayer& grad) {
  for (std::size_t f = 0; f < values.size(); ++f) {
    grad.tables[f][static_cast<std::size_t>(values[f])] += dy[f];
  }
}

// ---------------------------------------------------------------------------
// LSTM cell. Gate rows are stacked [input, forget, candidate, output].

struct LstmCell {
  Matrix input_weights;   // 4H x D
  Matrix hidden_weights;  // 4H x H
  Vector bias;            // 4H

  LstmCell() = default;
  LstmCell(std::size_t input_size, std::size_t hidden_size)
      : input_weights(4 * hidden_size, input_size),
        hidden_weights(4 * hidden_size, hidden_size),
        bias(4 * hidden_size, 0.0) {}

  static LstmCell glorot(std::size_t input_size, std::size_t hidden_size, Rng& rng) {
    LstmCell cell(input_size, hidden_size);
    glorot_fill(cell.input_weights.data, input_size, hidden_size, rng);
    glorot_fill(cell.hidden_weights.data, hidden_size, hidden_size, rng);
    return cell;
  }

  std::size_t input_size() const { return input_weights.cols; }
  std::size_t hidden_size() const { return hidden_weights.cols; }

  LstmCell zeros_like() const { return LstmCell(input_size(), hidden_size()); }

  std::vector<std::span<double>> parameters() { return {input_weights.data, hidden_weights.data, bias}; }

  bool operator==(const LstmCell&) const = default;
};

/// Per-step activations kept for backpropagation through time.
struct LstmTrace {
  std::vector<Vector> inputs;
  std::vector<Vector> hidden;  // T+1 entries, hidden[0] = 0
  std::vector<Vector> cell;    // T+1 entries
  std::vector<Vector> gates;   // T entries of 4H post-activation gate values

  const Vector& final_hidden() const { return hidden.back(); }
};

inline LstmTrace lstm_forward(const LstmCell& cell, std::span<const Vector> sequence) {
  if (sequence.empty()) throw Error(ErrorKind::empty_sequence, "LSTM needs at least one step");
  const std::size_t h = cell.hidden_size();
  LstmTrace trace;
  trace.hidden.emplace_back(h, 0.0);
  trace.cell.emplace_back(h, 0.0);
  for (const auto& x : sequence) {
    require_size(x.size(), cell.input_size(), "LSTM step input");
    Vector z(cell.bias);
    gemv_accumulate(cell.input_weights, x, z);
    gemv_accumulate(cell.hidden_weights, trace.hidden.back(), z);
    Vector c_next(h);
    Vector h_next(h);
    const Vector& c_prev = trace.cell.back();
    for (std::size_t k = 0; k < h; ++k) {
      const double ig = sigmoid(z[k]);
      const double fg = sigmoid(z[h + k]);
      const double gg = std::tanh(z[2 * h + k]);
      const double og = sigmoid(z[3 * h + k]);
      z[k] = ig;
      z[h + k] = fg;
      z[2 * h + k] = gg;
      z[3 * h + k] = og;
      c_next[k] = fg * c_prev[k] + ig * gg;
      h_next[k] = og * std::tanh(c_next[k]);
    }
    trace.inputs.push_back(x);
    trace.gates.push_back(std::move(z));
    trace.cell.push_back(std::move(c_next));
    trace.hidden.push_back(std::move(h_next));
  }
  return trace;
}

/// Backpropagation through time from dL/d(final hidden). Accumulates parameter
/// gradients into `grad` and returns dL/dx for every step.
inline std::vector<Vector> lstm_backward(const LstmCell& cell, const LstmTrace& trace,
                                         std::span<const double> d_final_hidden, LstmCell& grad) {
  const std::size_t h = cell.hidden_size();
  require_size(d_final_hidden.size(), h, "LSTM hidden gradient");
  const std::size_t steps = trace.gates.size();
  std::vector<Vector> dx(steps, Vector(cell.input_size(), 0.0));
  Vector dh(d_final_hidden.begin(), d_final_hidden.end());
  Vector dc(h, 0.0);
  Vector dz(4 * h);
  for (std::size_t s = steps; s-- > 0;) {
    const Vector& g = trace.gates[s];
    const Vector& c = trace.cell[s + 1];
    const Vector& c_prev = trace.cell[s];
    for (std::size_t k = 0; k < h; ++k) {
      const double ig = g[k];
      const double fg = g[h + k];
      const double gg = g[2 * h + k];
      const double og = g[3 * h + k];
      const double tc = std::tanh(c[k]);
      const double dct = dc[k] + dh[k] * og * (1.0 - tc * tc);
      dz[k] = dct * gg * ig * (1.0 - ig);
      dz[h + k] = dct * c_prev[k] * fg * (1.0 - fg);
      dz[2 * h + k] = dct * ig * (1.0 - gg * gg);
      dz[3 * h + k] = dh[k] * tc * og * (1.0 - og);
      dc[k] = dct * fg;
    }
    outer_accumulate(dz, trace.inputs[s], grad.input_weights);
    outer_accumulate(dz, trace.hidden[s], grad.hidden_weights);
    for (std::size_t k = 0; k < 4 * h; ++k) grad.bias[k] += dz[k];
    gemv_transposed_accumulate(cell.input_weights, dz, dx[s]);
    std::fill(dh.begin(), dh.end(), 0.0);
    gemv_transposed_accumulate(cell.hidden_weights, dz, dh);
  }
  return dx;
}

}  // namespace radarnomaly::nn
