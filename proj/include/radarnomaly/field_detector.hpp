#pragma once

// Field manipulation detection: a plot-level autoencoder over embedded
// categoricals and scaled numericals, and a track-level running average of
// plot scores.
//
// Network layout for a schema with C categoricals and N numericals:
//
//   [embed(c_1..c_C) | scale(x_1..x_N)]      width C + N
//   -> sigmoid stack (default widths 20, 15, 10, 15, 20)
//   -> sigmoid layer of width C + N
//   -> linear head: N numeric outputs, then one softmax group per categorical
//
// Plot score = MSE over numericals + summed SCCE over categoricals.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "radarnomaly/nn/grad_check.hpp"
#include "radarnomaly/nn/layers.hpp"
#include "radarnomaly/nn/loss.hpp"
#include "radarnomaly/nn/serialize.hpp"
#include "radarnomaly/stream_model.hpp"
#include "radarnomaly/training.hpp"

namespace radarnomaly {

struct TrackKey {
  std::string session_id;
  TrackId track_id = 0;

  auto operator<=>(const TrackKey&) const = default;
  bool operator==(const TrackKey&) const = default;

  static TrackKey of(const PlotRecord& p) { return {p.session_id, p.track_id}; }
  static TrackKey of(const Track& t) { return {t.session_id, t.track_id}; }
};

inline const std::vector<std::size_t>& default_hidden_widths() {
  static const std::vector<std::size_t> widths{20, 15, 10, 15, 20};
  return widths;
}

struct FieldNetwork {
  std::vector<int> cardinalities;
  std::size_t numerical_count = 0;
  nn::EmbeddingLayer embedding;
  std::vector<nn::DenseLayer> stack;
  nn::DenseLayer head;

  static FieldNetwork create(std::vector<int> cardinalities, std::size_t numerical_count,
                             std::span<const std::size_t> hidden_widths, nn::Rng& rng) {
    FieldNetwork net;
    net.cardinalities = std::move(cardinalities);
    net.numerical_count = numerical_count;
    net.embedding = nn::EmbeddingLayer::glorot(net.cardinalities, rng);
    const std::size_t width = net.input_width();
    std::size_t prev = width;
    for (std::size_t w : hidden_widths) {
      net.stack.push_back(nn::DenseLayer::glorot(prev, w, nn::Activation::sigmoid, rng, nn::kSigmoidGain));
      prev = w;
    }
    net.stack.push_back(nn::DenseLayer::glorot(prev, width, nn::Activation::sigmoid, rng, nn::kSigmoidGain));
    net.head = nn::DenseLayer::glorot(width, net.output_width(), nn::Activation::linear, rng);
    return net;
  }

  std::size_t input_width() const { return cardinalities.size() + numerical_count; }

  std::size_t output_width() const {
    std::size_t n = numerical_count;
    for (int c : cardinalities) n += static_cast<std::size_t>(c);
    return n;
  }

  /// Neuron counts of the autoencoder: input, every stack layer.
  std::vector<std::size_t> widths() const {
    std::vector<std::size_t> out{input_width()};
    for (const auto& l : stack) out.push_back(l.output_size());
    return out;
  }

  FieldNetwork zeros_like() const {
    FieldNetwork g;
    g.cardinalities = cardinalities;
    g.numerical_count = numerical_count;
    g.embedding = embedding.zeros_like();
    for (const auto& l : stack) g.stack.push_back(l.zeros_like());
    g.head = head.zeros_like();
    return g;
  }

  std::vector<std::span<double>> parameters() {
    std::vector<std::span<double>> out = embedding.parameters();
    for (auto& l : stack) {
      auto p = l.parameters();
      out.insert(out.end(), p.begin(), p.end());
    }
    auto h = head.parameters();
    out.insert(out.end(), h.begin(), h.end());
    return out;
  }

  bool operator==(const FieldNetwork&) const = default;
};

struct FieldPass {
  std::vector<nn::Vector> activations;  // input followed by each stack output
  nn::Vector head_output;
  std::vector<nn::Vector> probabilities;  // one softmax group per categorical
  double numeric_loss = 0.0;
  double categorical_loss = 0.0;

  double loss() const { return numeric_loss + categorical_loss; }

  std::span<const double> numeric_output(std::size_t n) const { return {head_output.data(), n}; }
};

inline FieldPass field_forward(const FieldNetwork& net, std::span<const int> cats,
                               std::span<const double> scaled_num) {
  nn::require_size(cats.size(), net.cardinalities.size(), "categorical input");
  nn::require_size(scaled_num.size(), net.numerical_count, "numerical input");
  FieldPass pass;
  nn::Vector input = nn::embed(net.embedding, cats);
  input.insert(input.end(), scaled_num.begin(), scaled_num.end());
  pass.activations.push_back(std::move(input));
  for (const auto& layer : net.stack) pass.activations.push_back(nn::dense_forward(layer, pass.activations.back()));
  pass.head_output = nn::dense_forward(net.head, pass.activations.back());

  pass.numeric_loss = nn::mse(pass.numeric_output(net.numerical_count), scaled_num);
  std::size_t offset = net.numerical_count;
  for (std::size_t f = 0; f < net.cardinalities.size(); ++f) {
    const auto card = static_cast<std::size_t>(net.cardinalities[f]);
    pass.probabilities.push_back(nn::softmax(std::span<const double>(pass.head_output).subspan(offset, card)));
    pass.categorical_loss += nn::scce(pass.probabilities.back(), static_cast<std::size_t>(cats[f]));
    offset += card;
  }
  return pass;
}

/// Accumulates d(loss)/d(parameters) of one forward pass into `grad`.
inline void field_backward(const FieldNetwork& net, const FieldPass& pass, std::span<const int> cats,
                           std::span<const double> scaled_num, FieldNetwork& grad) {
  nn::Vector d_head(net.output_width());
  const nn::Vector d_num = nn::mse_gradient(pass.numeric_output(net.numerical_count), scaled_num);
  std::copy(d_num.begin(), d_num.end(), d_head.begin());
  std::size_t offset = net.numerical_count;
  for (std::size_t f = 0; f < net.cardinalities.size(); ++f) {
    const nn::Vector g = nn::scce_logit_gradient(pass.probabilities[f], static_cast<std::size_t>(cats[f]));
    std::copy(g.begin(), g.end(), d_head.begin() + static_cast<std::ptrdiff_t>(offset));
    offset += g.size();
  }
  nn::Vector d = nn::dense_backward(net.head, pass.activations.back(), pass.head_output, d_head, grad.head);
  for (std::size_t l = net.stack.size(); l-- > 0;) {
    d = nn::dense_backward(net.stack[l], pass.activations[l], pass.activations[l + 1], d, grad.stack[l]);
  }
  nn::embedding_backward(cats, std::span<const double>(d).first(net.cardinalities.size()), grad.embedding);
}

struct FieldTrainingSummary {
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double initial_val_loss = 0.0;
  double best_val_loss = 0.0;
  std::size_t train_plots = 0;
  std::size_t val_plots = 0;
  std::vector<TrackKey> validation_tracks;

  bool operator==(const FieldTrainingSummary&) const = default;
};

struct FieldModel {
  FeatureSchema schema;
  MinMaxScaler scaler;
  FieldNetwork network;
  double plot_threshold = 0.0;
  double track_threshold = 0.0;
  bool trained = false;
  FieldTrainingSummary summary;

  bool operator==(const FieldModel&) const = default;
};

inline double score_scaled(const FieldNetwork& net, std::span<const int> cats, std::span<const double> scaled_num) {
  return field_forward(net, cats, scaled_num).loss();
}

/// Per-plot anomaly score: the training loss of the plot against its own
/// reconstruction.
inline double score_plot(const FieldModel& model, const PlotRecord& plot) {
  if (!model.trained) throw Error(ErrorKind::untrained_model, "field model is not trained");
  validate_plot(plot, model.schema);
  const auto scaled = model.scaler.transform(plot.num_values);
  return score_scaled(model.network, plot.cat_values, scaled);
}

/// Nearest-rank percentile, `q` in (0, 1].
inline double nearest_rank_percentile(std::span<const double> values, double q) {
  if (values.empty()) throw Error(ErrorKind::empty_validation, "percentile of an empty set");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size()) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

inline double calibrate_plot_threshold(std::span<const double> val_scores) {
  return nearest_rank_percentile(val_scores, 0.99);
}

inline double calibrate_plot_threshold(const FieldModel& model, std::span<const Track> val_tracks) {
  std::vector<double> scores;
  for (const auto& t : val_tracks) {
    for (const auto& p : t.plots) scores.push_back(score_plot(model, p));
  }
  return calibrate_plot_threshold(scores);
}

inline double max_track_average(std::span<const double> track_averages) {
  if (track_averages.empty()) throw Error(ErrorKind::empty_validation, "no validation tracks");
  return *std::max_element(track_averages.begin(), track_averages.end());
}

inline double mean_plot_score(const FieldModel& model, const Track& track) {
  if (track.plots.empty()) throw Error(ErrorKind::empty_validation, "track without plots");
  double sum = 0.0;
  for (const auto& p : track.plots) sum += score_plot(model, p);
  return sum / static_cast<double>(track.plots.size());
}

/// Maximum over validation tracks of the mean plot score.
inline double calibrate_track_threshold(const FieldModel& model, std::span<const Track> val_tracks) {
  std::vector<double> averages;
  for (const auto& t : val_tracks) averages.push_back(mean_plot_score(model, t));
  return max_track_average(averages);
}

/// Running sum and count of plot scores per track.
class TrackScoreCollector {
 public:
  /// Adds a plot score and returns the track's running average.
  double add(const TrackKey& key, double score) {
    auto& e = entries_[key];
    e.sum += score;
    ++e.count;
    return e.sum / static_cast<double>(e.count);
  }

  double track_score(const TrackKey& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end() || it->second.count == 0) {
      throw Error(ErrorKind::unknown_track, key.session_id + "/" + std::to_string(key.track_id));
    }
    return it->second.sum / static_cast<double>(it->second.count);
  }

  std::size_t count(const TrackKey& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.count;
  }

  bool contains(const TrackKey& key) const { return entries_.contains(key); }
  void erase(const TrackKey& key) { entries_.erase(key); }
  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    double sum = 0.0;
    std::size_t count = 0;
  };
  std::map<TrackKey, Entry> entries_;
};

struct FieldVerdict {
  double plot_score = 0.0;
  bool plot_alert = false;
  double track_average = 0.0;
  bool track_alert = false;
};

inline FieldVerdict detect(const FieldModel& model, const PlotRecord& plot, TrackScoreCollector& collector) {
  FieldVerdict v;
  v.plot_score = score_plot(model, plot);
  v.plot_alert = v.plot_score > model.plot_threshold;
  v.track_average = collector.add(TrackKey::of(plot), v.plot_score);
  v.track_alert = v.track_average > model.track_threshold;
  return v;
}

namespace detail {

struct FieldSample {
  std::vector<int> cats;
  std::vector<double> num;
};

inline double mean_loss(const FieldNetwork& net, std::span<const FieldSample> samples) {
  double sum = 0.0;
  for (const auto& s : samples) sum += score_scaled(net, s.cats, s.num);
  return sum / static_cast<double>(samples.size());
}

}  // namespace detail

/// Trains the plot-level autoencoder on benign tracks and calibrates both
/// thresholds on the validation tracks.
inline FieldModel train_field_model(std::span<const Track> tracks, const FeatureSchema& schema,
                                    const TrainConfig& config, std::uint64_t seed,
                                    std::span<const std::size_t> hidden_widths = default_hidden_widths()) {
  schema.validate();
  std::size_t total = 0;
  for (const auto& t : tracks) {
    for (const auto& p : t.plots) validate_plot(p, schema);
    total += t.plots.size();
  }
  if (total < std::max<std::size_t>(config.min_plots, 2) || tracks.size() < 2) {
    throw Error(ErrorKind::insufficient_data, "field model needs at least " + std::to_string(config.min_plots) +
                                                  " plots over two or more tracks, got " + std::to_string(total));
  }

  DataSplit split = split_tracks(tracks, config.validation_fraction, seed);

  FieldModel model;
  model.schema = schema;
  std::vector<std::vector<double>> rows;
  for (const auto& t : split.tr) {
    for (const auto& p : t.plots) rows.push_back(p.num_values);
  }
  model.scaler.fit(rows);

  auto to_samples = [&](const std::vector<Track>& set) {
    std::vector<detail::FieldSample> out;
    for (const auto& t : set) {
      for (const auto& p : t.plots) out.push_back({p.cat_values, model.scaler.transform(p.num_values)});
    }
    return out;
  };
  const auto train = to_samples(split.tr);
  const auto val = to_samples(split.val);

  std::vector<int> cards;
  for (const auto& c : schema.categorical) cards.push_back(c.cardinality);
  nn::Rng rng(seed);
  FieldNetwork net = FieldNetwork::create(cards, schema.numerical_count(), hidden_widths, rng);
  FieldNetwork grad = net.zeros_like();
  auto params = net.parameters();
  auto grads = grad.parameters();
  nn::AdamState adam(config.adam);

  FieldNetwork best = net;
  double best_loss = detail::mean_loss(net, val);
  if (!std::isfinite(best_loss)) throw Error(ErrorKind::non_finite_loss, "initial validation loss is not finite");
  model.summary.initial_val_loss = best_loss;
  std::size_t since_best = 0;

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::size_t epoch = 0;
  while (epoch < config.max_epochs) {
    ++epoch;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      zero_blocks(grads);
      for (std::size_t k = start; k < end; ++k) {
        const auto& s = train[order[k]];
        const FieldPass pass = field_forward(net, s.cats, s.num);
        field_backward(net, pass, s.cats, s.num, grad);
      }
      scale_blocks(grads, 1.0 / static_cast<double>(end - start));
      nn::adam_step(adam, params, grads);
    }
    const double val_loss = detail::mean_loss(net, val);
    if (!std::isfinite(val_loss)) {
      throw Error(ErrorKind::non_finite_loss, "validation loss diverged at epoch " + std::to_string(epoch));
    }
    if (config.on_epoch) config.on_epoch(epoch, val_loss);
    if (val_loss < best_loss) {
      best_loss = val_loss;
      best = net;
      model.summary.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }

  model.network = std::move(best);
  model.trained = true;
  model.summary.epochs_run = epoch;
  model.summary.best_val_loss = best_loss;
  model.summary.train_plots = train.size();
  model.summary.val_plots = val.size();
  for (const auto& t : split.val) model.summary.validation_tracks.push_back(TrackKey::of(t));

  model.plot_threshold = calibrate_plot_threshold(model, split.val);
  model.track_threshold = calibrate_track_threshold(model, split.val);
  return model;
}

// ---------------------------------------------------------------------------
// Persistence

inline OrderedJson track_keys_to_json(std::span<const TrackKey> keys) {
  OrderedJson arr = OrderedJson::array();
  for (const auto& k : keys) arr.push_back({{"session", k.session_id}, {"track_id", k.track_id}});
  return arr;
}

template <typename J>
std::vector<TrackKey> track_keys_from_json(const J& arr) {
  std::vector<TrackKey> out;
  for (const auto& k : arr) out.push_back({k.at("session").template get<std::string>(), k.at("track_id").template get<TrackId>()});
  return out;
}

inline OrderedJson to_json(const FieldModel& model) {
  OrderedJson j;
  j["architecture"] = {{"widths", model.network.widths()},
                       {"cardinalities", model.network.cardinalities},
                       {"numerical", model.network.numerical_count}};
  j["scaler"] = to_json(model.scaler);
  j["layers"] = OrderedJson::array();
  j["layers"].push_back(nn::to_json(model.network.embedding));
  for (const auto& l : model.network.stack) j["layers"].push_back(nn::to_json(l));
  j["layers"].push_back(nn::to_json(model.network.head));
  j["plot_threshold"] = model.plot_threshold;
  j["track_threshold"] = model.track_threshold;
  j["training"] = {{"epochs_run", model.summary.epochs_run},
                   {"best_epoch", model.summary.best_epoch},
                   {"initial_val_loss", model.summary.initial_val_loss},
                   {"best_val_loss", model.summary.best_val_loss},
                   {"train_plots", model.summary.train_plots},
                   {"val_plots", model.summary.val_plots},
                   {"validation_tracks", track_keys_to_json(model.summary.validation_tracks)}};
  return j;
}

template <typename J>
FieldModel field_model_from_json(const J& j, const FeatureSchema& schema) {
  FieldModel model;
  model.schema = schema;
  model.scaler = scaler_from_json(j.at("scaler"));
  const auto& layers = j.at("layers");
  if (layers.size() < 3) throw Error(ErrorKind::schema_violation, "field model needs embedding, stack and head layers");
  model.network.cardinalities = j.at("architecture").at("cardinalities").template get<std::vector<int>>();
  model.network.numerical_count = j.at("architecture").at("numerical").template get<std::size_t>();
  model.network.embedding = nn::embedding_from_json(layers.front());
  for (std::size_t i = 1; i + 1 < layers.size(); ++i) model.network.stack.push_back(nn::dense_from_json(layers[i]));
  model.network.head = nn::dense_from_json(layers.back());
  model.plot_threshold = j.at("plot_threshold").template get<double>();
  model.track_threshold = j.at("track_threshold").template get<double>();
  const auto& tr = j.at("training");
  model.summary.epochs_run = tr.at("epochs_run").template get<std::size_t>();
  model.summary.best_epoch = tr.at("best_epoch").template get<std::size_t>();
  model.summary.initial_val_loss = tr.at("initial_val_loss").template get<double>();
  model.summary.best_val_loss = tr.at("best_val_loss").template get<double>();
  model.summary.train_plots = tr.at("train_plots").template get<std::size_t>();
  model.summary.val_plots = tr.at("val_plots").template get<std::size_t>();
  model.summary.validation_tracks = track_keys_from_json(tr.at("validation_tracks"));
  model.trained = true;

  std::vector<int> cards;
  for (const auto& c : schema.categorical) cards.push_back(c.cardinality);
  if (model.network.cardinalities != cards || model.network.numerical_count != schema.numerical_count() ||
      model.scaler.size() != schema.numerical_count() ||
      model.network.embedding.tables.size() != cards.size() ||
      model.network.stack.front().input_size() != model.network.input_width() ||
      model.network.head.output_size() != model.network.output_width()) {
    throw Error(ErrorKind::shape_mismatch, "field model shapes disagree with the schema");
  }
  return model;
}

}  // namespace radarnomaly
