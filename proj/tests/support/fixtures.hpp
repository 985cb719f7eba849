#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "radarnomaly/benign_synth.hpp"
#include "radarnomaly/field_detector.hpp"
#include "radarnomaly/metrics.hpp"
#include "radarnomaly/nn/grad_check.hpp"
#include "radarnomaly/timing_detector.hpp"

namespace fixtures {

using namespace radarnomaly;

// Field autoencoder miniature: every parameter gradient of the summed
// MSE + SCCE loss over a few random samples.
inline nn::GradCheckReport field_grad_check(std::vector<int> cards, std::size_t n_num,
                                            std::vector<std::size_t> widths, std::uint64_t seed,
                                            bool corrupt = false) {
  nn::Rng rng(seed);
  FieldNetwork net = FieldNetwork::create(cards, n_num, widths, rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<int>> cats;
  std::vector<std::vector<double>> nums;
  for (int s = 0; s < 4; ++s) {
    std::vector<int> c;
    for (int card : cards) c.push_back(std::uniform_int_distribution<int>(0, card - 1)(rng));
    std::vector<double> x(n_num);
    for (auto& v : x) v = unit(rng);
    cats.push_back(c);
    nums.push_back(x);
  }
  FieldNetwork grad = net.zeros_like();
  for (std::size_t s = 0; s < cats.size(); ++s) {
    field_backward(net, field_forward(net, cats[s], nums[s]), cats[s], nums[s], grad);
  }
  if (corrupt) grad.head.bias[0] += 0.5;
  auto params = net.parameters();
  auto analytic = grad.parameters();
  const auto loss = [&] {
    double sum = 0.0;
    for (std::size_t s = 0; s < cats.size(); ++s) sum += field_forward(net, cats[s], nums[s]).loss();
    return sum;
  };
  return nn::grad_check(params, analytic, loss);
}

inline nn::GradCheckReport timing_grad_check(std::size_t input, std::size_t hidden, std::size_t k,
                                             std::uint64_t seed) {
  nn::Rng rng(seed);
  TimingNetwork net = TimingNetwork::create(input, hidden, rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<WindowExample> examples(3);
  for (auto& ex : examples) {
    ex.inputs.assign(k, nn::Vector(input));
    for (auto& step : ex.inputs) {
      for (auto& v : step) v = unit(rng);
    }
    ex.target = unit(rng);
  }
  TimingNetwork grad = net.zeros_like();
  for (const auto& ex : examples) timing_backward(net, ex, grad);
  auto params = net.parameters();
  auto analytic = grad.parameters();
  const auto loss = [&] {
    double sum = 0.0;
    for (const auto& ex : examples) {
      const double d = timing_predict(net, ex.inputs) - ex.target;
      sum += d * d;
    }
    return sum;
  };
  return nn::grad_check(params, analytic, loss);
}

// Pairwise statistic: P(score_pos > score_neg) + 0.5 P(tie).
inline double brute_auc(std::span<const LabeledScore> s) {
  double wins = 0.0;
  double pairs = 0.0;
  for (const auto& p : s) {
    if (p.label != 1) continue;
    for (const auto& n : s) {
      if (n.label != 0) continue;
      pairs += 1.0;
      if (p.score > n.score) wins += 1.0;
      else if (p.score == n.score) wins += 0.5;
    }
  }
  return pairs == 0.0 ? 0.0 : wins / pairs;
}

// Step sum over every distinct threshold, sweeping from the top score down.
inline double brute_ap(std::span<const LabeledScore> s) {
  std::set<double, std::greater<>> thresholds;
  double positives = 0.0;
  for (const auto& x : s) {
    thresholds.insert(x.score);
    positives += x.label;
  }
  if (positives == 0.0) return 0.0;
  double ap = 0.0;
  double prev_recall = 0.0;
  for (double t : thresholds) {
    double tp = 0.0;
    double called = 0.0;
    for (const auto& x : s) {
      if (x.score >= t) {
        called += 1.0;
        tp += x.label;
      }
    }
    const double recall = tp / positives;
    ap += (recall - prev_recall) * (tp / called);
    prev_recall = recall;
  }
  return ap;
}

inline std::vector<LabeledScore> random_scores(std::mt19937_64& rng, std::size_t max_size = 200) {
  const std::size_t n = std::uniform_int_distribution<std::size_t>(2, max_size)(rng);
  // Coarse grids make ties common; the continuous case checks the plain sweep.
  const int grid = std::uniform_int_distribution<int>(0, 3)(rng) == 0 ? 0 : std::uniform_int_distribution<int>(2, 20)(rng);
  std::vector<LabeledScore> out(n);
  for (auto& x : out) {
    x.score = grid == 0 ? std::uniform_real_distribution<double>(0.0, 1.0)(rng)
                        : std::uniform_int_distribution<int>(0, grid)(rng) / static_cast<double>(grid);
    x.label = std::uniform_int_distribution<int>(0, 1)(rng);
  }
  out[0].label = 1;
  out[1].label = 0;
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

// A regular track of `n` plots, every period equal to `period`.
inline Track regular_track(const FeatureSchema& schema, const std::string& session, TrackId id, std::size_t n,
                           Timestamp period, Timestamp start = 0, int cat = 0) {
  Track t;
  t.session_id = session;
  t.track_id = id;
  for (std::size_t i = 0; i < n; ++i) {
    PlotRecord p;
    p.session_id = session;
    p.track_id = id;
    p.update_time = start + static_cast<Timestamp>(i) * period;
    p.cat_values.assign(schema.categorical_count(), 0);
    for (std::size_t f = 0; f < schema.categorical_count(); ++f) {
      p.cat_values[f] = std::min(cat, schema.categorical[f].cardinality - 1);
    }
    p.num_values.assign(schema.numerical_count(), 0.0);
    for (std::size_t f = 0; f < schema.numerical_count(); ++f) p.num_values[f] = 0.1 * static_cast<double>(f + i % 3);
    t.plots.push_back(std::move(p));
  }
  return t;
}

// Small generated corpus for fast training tests.
inline SessionStore small_corpus(std::uint64_t seed, std::size_t tracks_per_session = 20) {
  SynthConfig c = default_synth_config(seed);
  c.session_count = 2;
  c.tracks_per_session = tracks_per_session;
  c.session_plot_targets.clear();
  return generate_corpus(c);
}

inline TrainConfig quick_train(std::size_t epochs = 5) {
  TrainConfig c;
  c.max_epochs = epochs;
  c.patience = epochs;
  return c;
}

}  // namespace fixtures
