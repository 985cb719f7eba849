#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "radarnomaly/error.hpp"

namespace radarnomaly::nn {

using Vector = std::vector<double>;

/// Dense row-major matrix of 64-bit reals.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool operator==(const Matrix&) const = default;
};

inline void require_size(std::size_t actual, std::size_t expected, const char* what) {
  if (actual != expected) {
    throw Error(ErrorKind::shape_mismatch, std::string(what) + ": expected size " + std::to_string(expected) +
                                               ", got " + std::to_string(actual));
  }
}

/// y += W x
inline void gemv_accumulate(const Matrix& w, std::span<const double> x, std::span<double> y) {
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double* wr = w.data.data() + r * w.cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
    y[r] += acc;
  }
}

/// dx += W^T dy
inline void gemv_transposed_accumulate(const Matrix& w, std::span<const double> dy, std::span<double> dx) {
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double* wr = w.data.data() + r * w.cols;
    const double g = dy[r];
    for (std::size_t c = 0; c < w.cols; ++c) dx[c] += wr[c] * g;
  }
}

/// G += dy x^T
inline void outer_accumulate(std::span<const double> dy, std::span<const double> x, Matrix& g) {
  for (std::size_t r = 0; r < g.rows; ++r) {
    double* gr = g.data.data() + r * g.cols;
    const double d = dy[r];
    for (std::size_t c = 0; c < g.cols; ++c) gr[c] += d * x[c];
  }
}

}  // namespace radarnomaly::nn
