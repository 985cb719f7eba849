#pragma once

// Pieces shared by both detectors: training configuration, the 80/20 track
// split and min-max scaling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "radarnomaly/nn/adam.hpp"
#include "radarnomaly/stream_model.hpp"

namespace radarnomaly {

struct TrainConfig {
  std::size_t max_epochs = 500;
  std::size_t patience = 20;
  std::size_t batch_size = 64;
  double validation_fraction = 0.2;
  nn::AdamConfig adam;
  std::size_t min_plots = 500;    // field detector
  std::size_t min_windows = 200;  // timing detector
  std::function<void(std::size_t epoch, double val_loss)> on_epoch;  // not serialized
};

inline OrderedJson to_json(const TrainConfig& c) {
  OrderedJson j;
  j["max_epochs"] = c.max_epochs;
  j["patience"] = c.patience;
  j["batch_size"] = c.batch_size;
  j["validation_fraction"] = c.validation_fraction;
  j["learning_rate"] = c.adam.learning_rate;
  j["beta1"] = c.adam.beta1;
  j["beta2"] = c.adam.beta2;
  j["epsilon"] = c.adam.epsilon;
  j["min_plots"] = c.min_plots;
  j["min_windows"] = c.min_windows;
  return j;
}

inline TrainConfig train_config_from_json(const Json& j) {
  TrainConfig c;
  try {
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
    c.adam.learning_rate = j.value("learning_rate", c.adam.learning_rate);
    c.adam.beta1 = j.value("beta1", c.adam.beta1);
    c.adam.beta2 = j.value("beta2", c.adam.beta2);
    c.adam.epsilon = j.value("epsilon", c.adam.epsilon);
    c.min_plots = j.value("min_plots", c.min_plots);
    c.min_windows = j.value("min_windows", c.min_windows);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::invalid_config, std::string("train config: ") + e.what());
  }
  if (c.batch_size == 0) throw Error(ErrorKind::invalid_config, "train config: batch_size must be positive");
  if (c.max_epochs == 0) throw Error(ErrorKind::invalid_config, "train config: max_epochs must be positive");
  if (!(c.validation_fraction > 0.0 && c.validation_fraction < 1.0)) {
    throw Error(ErrorKind::invalid_config, "train config: validation_fraction must lie in (0,1)");
  }
  return c;
}

struct DataSplit {
  std::vector<Track> tr;
  std::vector<Track> val;
};

/// Seeded shuffle of whole tracks, then the last `validation_fraction` of them
/// (rounded, at least one) go to validation.
inline DataSplit split_tracks(std::span<const Track> tracks, double validation_fraction, std::uint64_t seed) {
  if (tracks.size() < 2) throw Error(ErrorKind::insufficient_data, "need at least two tracks to split");
  std::vector<std::size_t> order(tracks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  auto n_val = static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(tracks.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, tracks.size() - 1);
  DataSplit split;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < order.size() - n_val ? split.tr : split.val).push_back(tracks[order[k]]);
  }
  return split;
}

/// Per-dimension min-max scaling. Out-of-range values extrapolate linearly;
/// a constant dimension is only shifted.
struct MinMaxScaler {
  std::vector<double> min;
  std::vector<double> max;

  bool fitted() const { return !min.empty(); }
  std::size_t size() const { return min.size(); }

  void fit(std::span<const std::vector<double>> rows) {
    if (rows.empty()) throw Error(ErrorKind::insufficient_data, "cannot fit scaler on zero rows");
    min = rows.front();
    max = rows.front();
    for (const auto& r : rows) {
      nn::require_size(r.size(), min.size(), "scaler row");
      for (std::size_t i = 0; i < r.size(); ++i) {
        min[i] = std::min(min[i], r[i]);
        max[i] = std::max(max[i], r[i]);
      }
    }
  }

  double transform(std::size_t dim, double value) const {
    const double range = max[dim] - min[dim];
    return range > 0.0 ? (value - min[dim]) / range : value - min[dim];
  }

  std::vector<double> transform(std::span<const double> row) const {
    nn::require_size(row.size(), min.size(), "scaler input");
    std::vector<double> out(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) out[i] = transform(i, row[i]);
    return out;
  }

  bool operator==(const MinMaxScaler&) const = default;
};

inline OrderedJson to_json(const MinMaxScaler& s) {
  OrderedJson j;
  j["min"] = s.min;
  j["max"] = s.max;
  return j;
}

template <typename J>
MinMaxScaler scaler_from_json(const J& j) {
  MinMaxScaler s;
  s.min = j.at("min").template get<std::vector<double>>();
  s.max = j.at("max").template get<std::vector<double>>();
  nn::require_size(s.max.size(), s.min.size(), "scaler bounds");
  return s;
}

/// Zeroes every block of a gradient buffer.
inline void zero_blocks(std::span<const std::span<double>> blocks) {
  for (auto b : blocks) std::fill(b.begin(), b.end(), 0.0);
}

inline void scale_blocks(std::span<const std::span<double>> blocks, double factor) {
  for (auto b : blocks) {
    for (double& v : b) v *= factor;
  }
}

}  // namespace radarnomaly
