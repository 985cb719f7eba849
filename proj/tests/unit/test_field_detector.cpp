#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "fixtures.hpp"
#include "radarnomaly/attack_forge.hpp"

using namespace radarnomaly;

namespace {

FieldModel train_small(std::uint64_t seed) {
  const auto corpus = fixtures::small_corpus(seed, 20);
  return train_field_model(corpus.all_tracks(), default_schema(), fixtures::quick_train(8), seed);
}

}  // namespace

TEST_CASE("plot threshold is the nearest-rank 99th percentile", "[field]") {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(calibrate_plot_threshold(v) == 99.0);
  CHECK(calibrate_plot_threshold(std::vector<double>(7, 0.4)) == 0.4);
  CHECK(calibrate_plot_threshold(std::vector<double>{2.5}) == 2.5);
  CHECK_THROWS_AS(calibrate_plot_threshold(std::vector<double>{}), Error);
}

TEST_CASE("track scores are running means", "[field]") {
  TrackScoreCollector c;
  const TrackKey a{"R1", 1};
  c.add(a, 0.1);
  c.add(a, 0.3);
  CHECK(c.add(a, 0.2) == Catch::Approx(0.2).epsilon(1e-15));
  const TrackKey b{"R1", 2};
  CHECK(c.add(b, 0.7) == 0.7);
  const TrackKey d{"R2", 2};
  c.add(d, 0.4);
  CHECK(c.add(d, 0.0) == 0.2);
  CHECK(c.track_score(b) == 0.7);
  CHECK_THROWS_AS(c.track_score(TrackKey{"R9", 1}), Error);
}

TEST_CASE("track threshold is the largest track average", "[field]") {
  CHECK(max_track_average(std::vector<double>{0.1, 0.3, 0.2}) == 0.3);
  CHECK(max_track_average(std::vector<double>{0.42}) == 0.42);
}

TEST_CASE("an exact reconstruction scores zero", "[field]") {
  nn::Rng rng(1);
  const std::vector<std::size_t> widths{4, 3, 4};
  FieldNetwork net = FieldNetwork::create({3, 2}, 2, widths, rng);
  const std::vector<int> cats{2, 0};
  const std::vector<double> num{0.25, 0.75};
  std::fill(net.head.weights.data.begin(), net.head.weights.data.end(), 0.0);
  // numeric outputs first, then one logit group per categorical
  net.head.bias = {0.25, 0.75, 0.0, 0.0, 1000.0, 1000.0, 0.0};
  CHECK(score_scaled(net, cats, num) == 0.0);
}

TEST_CASE("trained field model", "[field]") {
  const FieldModel model = train_small(4);
  REQUIRE(model.trained);
  const auto& s = model.summary;
  CHECK(s.best_val_loss <= s.initial_val_loss);
  CHECK(model.network.widths() == std::vector<std::size_t>{27, 20, 15, 10, 15, 20, 27});

  const auto corpus = fixtures::small_corpus(4, 20);
  std::vector<Track> val;
  for (const auto& t : corpus.all_tracks()) {
    for (const auto& k : s.validation_tracks) {
      if (TrackKey::of(t) == k) val.push_back(t);
    }
  }
  REQUIRE(val.size() == s.validation_tracks.size());

  SECTION("scores are finite and non-negative") {
    for (const auto& t : corpus.all_tracks()) {
      for (const auto& p : t.plots) {
        const double v = score_plot(model, p);
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
      }
    }
  }
  SECTION("thresholds come from the validation tracks") {
    CHECK(calibrate_plot_threshold(model, val) == model.plot_threshold);
    CHECK(calibrate_track_threshold(model, val) == model.track_threshold);
    for (const auto& t : val) CHECK_FALSE(mean_plot_score(model, t) > model.track_threshold);
  }
  SECTION("alerts use strict inequality") {
    FieldModel m = model;
    const auto& p = val.front().plots.front();
    const double score = score_plot(m, p);
    m.plot_threshold = score;
    m.track_threshold = score;
    TrackScoreCollector c;
    auto v = detect(m, p, c);
    CHECK_FALSE(v.plot_alert);
    CHECK_FALSE(v.track_alert);
    m.plot_threshold = score * 2 + 1;
    m.track_threshold = score * 2 + 1;
    TrackScoreCollector c2;
    v = detect(m, p, c2);
    CHECK_FALSE(v.plot_alert);
    CHECK_FALSE(v.track_alert);
  }
  SECTION("serialization round trip") {
    const auto back = field_model_from_json(Json::parse(to_json(model).dump()), model.schema);
    CHECK(back == model);
    for (const auto& p : val.front().plots) CHECK(score_plot(back, p) == score_plot(model, p));
  }
}

TEST_CASE("field training is deterministic", "[field]") {
  CHECK(to_json(train_small(6)).dump() == to_json(train_small(6)).dump());
}

TEST_CASE("field training needs data", "[field]") {
  const auto schema = default_schema();
  const std::vector<Track> one{fixtures::regular_track(schema, "R1", 1, 1, 100)};
  try {
    train_field_model(one, schema, TrainConfig{}, 1);
    FAIL("expected InsufficientData");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::insufficient_data);
  }
}

TEST_CASE("unknown categorical values are schema violations", "[field]") {
  const FieldModel model = train_small(4);
  auto p = fixtures::small_corpus(4, 2).all_tracks().front().plots.front();
  p.cat_values[0] = 99;
  CHECK_THROWS_AS(score_plot(model, p), Error);
}
