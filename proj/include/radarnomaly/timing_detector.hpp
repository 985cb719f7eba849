#pragma once

// Timing-based anomaly detection: an LSTM regressor that predicts the next
// UpdatingPeriod of a track from its previous K plots.
//
// Per-plot input vector (before min-max scaling):
//   [timing numerical | one-hot of each timing categorical | UpdatingPeriod]

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "radarnomaly/field_detector.hpp"
#include "radarnomaly/nn/layers.hpp"
#include "radarnomaly/nn/loss.hpp"
#include "radarnomaly/nn/serialize.hpp"
#include "radarnomaly/stream_model.hpp"
#include "radarnomaly/training.hpp"

namespace radarnomaly {

struct TimingConfig {
  std::size_t window = 5;  // K
  std::size_t hidden = 5;

  void validate(const FeatureSchema& schema) const {
    if (window < 1) throw Error(ErrorKind::invalid_config, "timing window K must be at least 1");
    if (hidden < 1) throw Error(ErrorKind::invalid_config, "timing hidden size must be at least 1");
    schema.validate();
  }
};

/// Width of the per-plot timing vector for a schema.
inline std::size_t timing_input_width(const FeatureSchema& schema) {
  std::size_t width = 2;
  for (std::size_t idx : schema.timing_categoricals()) {
    width += static_cast<std::size_t>(schema.categorical[idx].cardinality);
  }
  return width;
}

inline std::vector<double> one_hot(int value, int cardinality) {
  if (value < 0 || value >= cardinality) throw Error(ErrorKind::index_out_of_range, "one-hot value out of range");
  std::vector<double> v(static_cast<std::size_t>(cardinality), 0.0);
  v[static_cast<std::size_t>(value)] = 1.0;
  return v;
}

/// Unscaled timing vector of one plot given its UpdatingPeriod.
inline std::vector<double> raw_timing_vector(const PlotRecord& plot, double period, const FeatureSchema& schema) {
  std::vector<double> v;
  v.reserve(timing_input_width(schema));
  v.push_back(plot.num_values[schema.timing_numerical()]);
  for (std::size_t idx : schema.timing_categoricals()) {
    const auto h = one_hot(plot.cat_values[idx], schema.categorical[idx].cardinality);
    v.insert(v.end(), h.begin(), h.end());
  }
  v.push_back(period);
  return v;
}

struct WindowExample {
  std::vector<nn::Vector> inputs;  // K scaled plot vectors
  double target = 0.0;             // scaled UpdatingPeriod of the following plot
};

inline std::size_t window_count(std::size_t track_length, std::size_t k) {
  return track_length > k ? track_length - k : 0;
}

inline std::vector<std::vector<double>> raw_track_vectors(const Track& track, const FeatureSchema& schema) {
  const auto periods = updating_periods(track);
  std::vector<std::vector<double>> rows;
  rows.reserve(track.plots.size());
  for (std::size_t j = 0; j < track.plots.size(); ++j) {
    rows.push_back(raw_timing_vector(track.plots[j], periods[j], schema));
  }
  return rows;
}

/// Sliding windows (stride 1) of K scaled plot vectors, each labelled with the
/// scaled UpdatingPeriod of the plot that follows it.
inline std::vector<WindowExample> preprocess_track(const Track& track, const FeatureSchema& schema,
                                                   const TimingConfig& config, const MinMaxScaler& scaler) {
  const std::size_t k = config.window;
  if (track.plots.size() < k + 1) {
    throw Error(ErrorKind::track_too_short, "track of " + std::to_string(track.plots.size()) +
                                                " plots is shorter than K+1 = " + std::to_string(k + 1));
  }
  const auto raw = raw_track_vectors(track, schema);
  std::vector<nn::Vector> scaled;
  scaled.reserve(raw.size());
  for (const auto& r : raw) scaled.push_back(scaler.transform(r));
  const std::size_t period_dim = raw.front().size() - 1;
  std::vector<WindowExample> out;
  for (std::size_t j = 0; j + k < scaled.size(); ++j) {
    WindowExample ex;
    ex.inputs.assign(scaled.begin() + static_cast<std::ptrdiff_t>(j),
                     scaled.begin() + static_cast<std::ptrdiff_t>(j + k));
    ex.target = scaled[j + k][period_dim];
    out.push_back(std::move(ex));
  }
  return out;
}

struct TimingNetwork {
  nn::LstmCell lstm;
  nn::DenseLayer output;  // hidden -> 1, linear

  static TimingNetwork create(std::size_t input_size, std::size_t hidden, nn::Rng& rng) {
    TimingNetwork net;
    net.lstm = nn::LstmCell::glorot(input_size, hidden, rng);
    net.output = nn::DenseLayer::glorot(hidden, 1, nn::Activation::linear, rng);
    return net;
  }

  TimingNetwork zeros_like() const { return {lstm.zeros_like(), output.zeros_like()}; }

  std::vector<std::span<double>> parameters() {
    auto out = lstm.parameters();
    auto o = output.parameters();
    out.insert(out.end(), o.begin(), o.end());
    return out;
  }

  bool operator==(const TimingNetwork&) const = default;
};

inline double timing_predict(const TimingNetwork& net, std::span<const nn::Vector> window) {
  const auto trace = nn::lstm_forward(net.lstm, window);
  return nn::dense_forward(net.output, trace.final_hidden())[0];
}

/// Squared error of one window; accumulates its gradient into `grad`.
inline double timing_backward(const TimingNetwork& net, const WindowExample& ex, TimingNetwork& grad) {
  const auto trace = nn::lstm_forward(net.lstm, ex.inputs);
  const auto& h = trace.final_hidden();
  const double pred = nn::dense_forward(net.output, h)[0];
  const double diff = pred - ex.target;
  const double d_pred[1] = {2.0 * diff};
  const auto dh = nn::dense_backward(net.output, h, std::span<const double>(&pred, 1), d_pred, grad.output);
  nn::lstm_backward(net.lstm, trace, dh, grad.lstm);
  return diff * diff;
}

/// Mean plus sample standard deviation (n-1 denominator) of validation errors.
inline double calibrate_thr(std::span<const double> errors) {
  if (errors.size() < 2) throw Error(ErrorKind::insufficient_data, "threshold needs at least two errors");
  const double n = static_cast<double>(errors.size());
  double mean = 0.0;
  for (double e : errors) mean += e;
  mean /= n;
  double ss = 0.0;
  for (double e : errors) ss += (e - mean) * (e - mean);
  return mean + std::sqrt(ss / (n - 1.0));
}

struct TimingTrainingSummary {
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double initial_val_loss = 0.0;
  double best_val_loss = 0.0;
  std::size_t train_windows = 0;
  std::size_t val_windows = 0;
  std::vector<TrackKey> validation_tracks;

  bool operator==(const TimingTrainingSummary&) const = default;
};

struct TimingModel {
  FeatureSchema schema;
  TimingConfig config;
  MinMaxScaler scaler;
  TimingNetwork network;
  double threshold = 0.0;
  bool trained = false;
  TimingTrainingSummary summary;

  std::size_t period_dim() const { return scaler.size() - 1; }

  bool operator==(const TimingModel& o) const {
    return schema == o.schema && config.window == o.config.window && config.hidden == o.config.hidden &&
           scaler == o.scaler && network == o.network && threshold == o.threshold && trained == o.trained &&
           summary == o.summary;
  }
};

struct TimingVerdict {
  double predicted = 0.0;  // scaled
  double actual = 0.0;     // scaled
  double squared_error = 0.0;
  bool alert = false;
};

/// Scores a window of K scaled plot vectors against the raw UpdatingPeriod of
/// the plot that follows it.
inline TimingVerdict score_window(const TimingModel& model, std::span<const nn::Vector> window,
                                  double actual_next_period) {
  if (!model.trained) throw Error(ErrorKind::untrained_model, "timing model is not trained");
  nn::require_size(window.size(), model.config.window, "timing window");
  TimingVerdict v;
  v.predicted = timing_predict(model.network, window);
  v.actual = model.scaler.transform(model.period_dim(), actual_next_period);
  const double d = v.predicted - v.actual;
  v.squared_error = d * d;
  v.alert = v.squared_error > model.threshold;
  return v;
}

/// Squared errors of every window of a track, indexed by the scored plot
/// (plot index = window index + K). Short tracks yield nothing.
inline std::vector<double> track_window_errors(const TimingModel& model, const Track& track) {
  std::vector<double> out;
  if (track.plots.size() < model.config.window + 1) return out;
  for (const auto& ex : preprocess_track(track, model.schema, model.config, model.scaler)) {
    const double d = timing_predict(model.network, ex.inputs) - ex.target;
    out.push_back(d * d);
  }
  return out;
}

/// Trains the regressor on benign tracks; tracks shorter than K+1 are skipped.
inline TimingModel train_timing_model(std::span<const Track> tracks, const FeatureSchema& schema,
                                      const TimingConfig& config, const TrainConfig& train_config,
                                      std::uint64_t seed) {
  config.validate(schema);
  std::vector<Track> usable;
  std::size_t windows = 0;
  for (const auto& t : tracks) {
    for (const auto& p : t.plots) validate_plot(p, schema);
    if (t.plots.size() >= config.window + 1) {
      usable.push_back(t);
      windows += window_count(t.plots.size(), config.window);
    }
  }
  if (windows < train_config.min_windows || usable.size() < 2) {
    throw Error(ErrorKind::insufficient_data, "timing model needs at least " + std::to_string(train_config.min_windows) +
                                                  " windows over two or more tracks, got " + std::to_string(windows));
  }

  DataSplit split = split_tracks(usable, train_config.validation_fraction, seed);
  TimingModel model;
  model.schema = schema;
  model.config = config;
  std::vector<std::vector<double>> rows;
  for (const auto& t : split.tr) {
    auto r = raw_track_vectors(t, schema);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  model.scaler.fit(rows);

  auto windows_of = [&](const std::vector<Track>& set) {
    std::vector<WindowExample> out;
    for (const auto& t : set) {
      auto w = preprocess_track(t, schema, config, model.scaler);
      out.insert(out.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
    }
    return out;
  };
  const auto train = windows_of(split.tr);
  const auto val = windows_of(split.val);
  if (val.size() < 2 || train.empty()) throw Error(ErrorKind::insufficient_data, "timing split left too few windows");

  nn::Rng rng(seed);
  TimingNetwork net = TimingNetwork::create(timing_input_width(schema), config.hidden, rng);
  TimingNetwork grad = net.zeros_like();
  auto params = net.parameters();
  auto grads = grad.parameters();
  nn::AdamState adam(train_config.adam);

  auto val_errors = [&](const TimingNetwork& n) {
    std::vector<double> errs;
    errs.reserve(val.size());
    for (const auto& ex : val) {
      const double d = timing_predict(n, ex.inputs) - ex.target;
      errs.push_back(d * d);
    }
    return errs;
  };
  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };

  TimingNetwork best = net;
  double best_loss = mean_of(val_errors(net));
  if (!std::isfinite(best_loss)) throw Error(ErrorKind::non_finite_loss, "initial validation loss is not finite");
  model.summary.initial_val_loss = best_loss;
  std::size_t since_best = 0;

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t epoch = 0;
  while (epoch < train_config.max_epochs) {
    ++epoch;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += train_config.batch_size) {
      const std::size_t end = std::min(order.size(), start + train_config.batch_size);
      zero_blocks(grads);
      for (std::size_t k = start; k < end; ++k) timing_backward(net, train[order[k]], grad);
      scale_blocks(grads, 1.0 / static_cast<double>(end - start));
      nn::adam_step(adam, params, grads);
    }
    const double val_loss = mean_of(val_errors(net));
    if (!std::isfinite(val_loss)) {
      throw Error(ErrorKind::non_finite_loss, "validation loss diverged at epoch " + std::to_string(epoch));
    }
    if (train_config.on_epoch) train_config.on_epoch(epoch, val_loss);
    if (val_loss < best_loss) {
      best_loss = val_loss;
      best = net;
      model.summary.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= train_config.patience) {
      break;
    }
  }

  model.network = std::move(best);
  model.trained = true;
  model.summary.epochs_run = epoch;
  model.summary.best_val_loss = best_loss;
  model.summary.train_windows = train.size();
  model.summary.val_windows = val.size();
  for (const auto& t : split.val) model.summary.validation_tracks.push_back(TrackKey::of(t));
  model.threshold = calibrate_thr(val_errors(model.network));
  return model;
}

/// Incremental per-track window state for live scoring. Produces the same
/// verdicts as `preprocess_track` + `score_window` over a complete track.
class TimingStream {
 public:
  explicit TimingStream(const TimingModel& model) : model_(&model) {}

  /// Feeds the next plot of its track; returns a verdict once K earlier plots
  /// of the same track have been seen.
  std::optional<TimingVerdict> observe(const PlotRecord& plot) {
    auto& s = states_[TrackKey::of(plot)];
    const auto& schema = model_->schema;
    std::optional<TimingVerdict> verdict;
    if (s.seen == 0) {
      s.first = plot;
    } else {
      const double period = static_cast<double>(plot.update_time - s.last_time);
      if (s.seen == 1) push(s, raw_timing_vector(*s.first, period, schema));
      s.first.reset();
      if (s.history.size() == model_->config.window) {
        verdict = score_window(*model_, std::vector<nn::Vector>(s.history.begin(), s.history.end()), period);
      }
      push(s, raw_timing_vector(plot, period, schema));
    }
    s.last_time = plot.update_time;
    ++s.seen;
    return verdict;
  }

  void evict(const TrackKey& key) { states_.erase(key); }
  std::size_t tracked() const { return states_.size(); }

 private:
  struct State {
    std::size_t seen = 0;
    Timestamp last_time = 0;
    std::optional<PlotRecord> first;
    std::deque<nn::Vector> history;
  };

  void push(State& s, const std::vector<double>& raw) {
    s.history.push_back(model_->scaler.transform(raw));
    if (s.history.size() > model_->config.window) s.history.pop_front();
  }

  const TimingModel* model_;
  std::map<TrackKey, State> states_;
};

// ---------------------------------------------------------------------------
// Persistence

inline OrderedJson to_json(const TimingModel& model) {
  OrderedJson j;
  j["window"] = model.config.window;
  j["hidden"] = model.config.hidden;
  j["features"] = model.schema.timing;
  j["scaler"] = to_json(model.scaler);
  j["layers"] = OrderedJson::array({nn::to_json(model.network.lstm), nn::to_json(model.network.output)});
  j["threshold"] = model.threshold;
  j["training"] = {{"epochs_run", model.summary.epochs_run},
                   {"best_epoch", model.summary.best_epoch},
                   {"initial_val_loss", model.summary.initial_val_loss},
                   {"best_val_loss", model.summary.best_val_loss},
                   {"train_windows", model.summary.train_windows},
                   {"val_windows", model.summary.val_windows},
                   {"validation_tracks", track_keys_to_json(model.summary.validation_tracks)}};
  return j;
}

template <typename J>
TimingModel timing_model_from_json(const J& j, const FeatureSchema& schema) {
  TimingModel model;
  model.schema = schema;
  model.config.window = j.at("window").template get<std::size_t>();
  model.config.hidden = j.at("hidden").template get<std::size_t>();
  model.scaler = scaler_from_json(j.at("scaler"));
  const auto& layers = j.at("layers");
  if (layers.size() != 2) throw Error(ErrorKind::schema_violation, "timing model needs lstm and output layers");
  model.network.lstm = nn::lstm_from_json(layers[0]);
  model.network.output = nn::dense_from_json(layers[1]);
  model.threshold = j.at("threshold").template get<double>();
  const auto& tr = j.at("training");
  model.summary.epochs_run = tr.at("epochs_run").template get<std::size_t>();
  model.summary.best_epoch = tr.at("best_epoch").template get<std::size_t>();
  model.summary.initial_val_loss = tr.at("initial_val_loss").template get<double>();
  model.summary.best_val_loss = tr.at("best_val_loss").template get<double>();
  model.summary.train_windows = tr.at("train_windows").template get<std::size_t>();
  model.summary.val_windows = tr.at("val_windows").template get<std::size_t>();
  model.summary.validation_tracks = track_keys_from_json(tr.at("validation_tracks"));
  model.trained = true;
  const std::size_t width = timing_input_width(schema);
  if (model.config.window < 1 || model.scaler.size() != width || model.network.lstm.input_size() != width ||
      model.network.lstm.hidden_size() != model.config.hidden || model.network.output.input_size() != model.config.hidden ||
      model.network.output.output_size() != 1) {
    throw Error(ErrorKind::shape_mismatch, "timing model shapes disagree with the schema");
  }
  return model;
}

}  // namespace radarnomaly
