#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "fixtures.hpp"
#include "radarnomaly/attack_forge.hpp"

using namespace radarnomaly;

namespace {

SessionStore store_of(std::vector<Track> tracks) {
  SessionStore s;
  for (auto& t : tracks) s.sessions[t.session_id].push_back(std::move(t));
  return s;
}

}  // namespace

TEST_CASE("manipulation on a binary feature flips to the other value", "[attack]") {
  const auto schema = default_schema();
  const auto store = store_of({fixtures::regular_track(schema, "R1", 1, 12, 100, 0, 0),
                               fixtures::regular_track(schema, "R1", 2, 8, 100, 50, 0)});
  const auto set = manipulate_categorical(store, schema, "alertRaised", 1);
  const auto f = *schema.categorical_index("alertRaised");
  std::size_t forged = 0;
  for (const auto& lp : set.plots) {
    if (lp.label == 1) {
      CHECK(lp.plot.cat_values[f] == 1);
      CHECK(lp.plot.session_id == "R1+dup");
      CHECK(lp.attack == "manipulate:alertRaised");
      ++forged;
    } else {
      CHECK(lp.plot.cat_values[f] == 0);
    }
  }
  CHECK(forged == 20);
}

TEST_CASE("manipulation doubles the set and balances labels", "[attack]") {
  const auto schema = default_schema();
  const auto store = fixtures::small_corpus(2, 10);
  const auto n = store.plot_count();
  for (const char* feature : {"objectType", "alertRaised", "objectCategory", "sigFade"}) {
    const auto set = manipulate_categorical(store, schema, feature, 9);
    CHECK(set.plots.size() == 2 * n);
    CHECK(set.positives() == n);
    const auto f = *schema.categorical_index(feature);
    // every forged track carries one constant value that differs from the modal value
    std::map<TrackKey, std::set<int>> values;
    for (const auto& lp : set.plots) {
      if (lp.label == 1) values[TrackKey::of(lp.plot)].insert(lp.plot.cat_values[f]);
    }
    for (const auto& t : store.all_tracks()) {
      const auto& v = values.at(TrackKey{t.session_id + "+dup", t.track_id});
      REQUIRE(v.size() == 1);
      CHECK(*v.begin() != modal_value(t, f, schema.categorical[f].cardinality));
    }
  }
  CHECK(manipulate_categorical(store, schema, "objectType", 3).plots ==
        manipulate_categorical(store, schema, "objectType", 3).plots);
  CHECK_THROWS_AS(manipulate_categorical(store, schema, "num1", 3), Error);
}

TEST_CASE("drop arithmetic", "[attack]") {
  const auto schema = default_schema();
  const auto track = fixtures::regular_track(schema, "R1", 1, 40, 100);
  const auto out = apply_drop(track, 12, 15);
  CHECK(out.dropped == 15);
  CHECK(out.track.plots.size() == 25);
  CHECK(out.track.plots[out.labeled].update_time == track.plots[27].update_time);
  CHECK(out.track.plots[11].update_time == track.plots[11].update_time);

  // budget larger than what is left stops at the last plot
  const auto tail = apply_drop(track, 30, 100);
  CHECK(tail.dropped == 9);
  CHECK(tail.track.plots.back().update_time == track.plots.back().update_time);
}

TEST_CASE("drop eligibility and labels", "[attack]") {
  const auto schema = default_schema();
  CHECK_FALSE(drop_eligible(12, 10, 5));
  CHECK_FALSE(drop_eligible(16, 10, 5));
  CHECK(drop_eligible(17, 10, 5));

  const auto short_store = store_of({fixtures::regular_track(schema, "R1", 1, 12, 100)});
  const auto passed = drop_plots(short_store, 10, 5, 1);
  CHECK(passed.plots.size() == 12);
  CHECK(passed.positives() == 0);
  CHECK(passed.provenance.at("eligible_tracks") == 0);

  const auto store = fixtures::small_corpus(4, 15);
  std::size_t eligible = 0;
  for (const auto& t : store.all_tracks()) eligible += drop_eligible(t.size(), 10, 5);
  const auto set = drop_plots(store, 10, 5, 77);
  CHECK(set.positives() == eligible);
  CHECK(set.plots == drop_plots(store, 10, 5, 77).plots);

  // the labelled plot sits past the first K plots of its track
  std::map<TrackKey, std::size_t> positions;
  std::map<TrackKey, std::size_t> seen;
  for (const auto& lp : set.plots) {
    const auto key = TrackKey::of(lp.plot);
    if (lp.label == 1) positions[key] = seen[key];
    ++seen[key];
  }
  for (const auto& [key, pos] : positions) CHECK(pos >= 5);
}

TEST_CASE("labelled sets survive a file round trip", "[attack]") {
  const auto schema = default_schema();
  const auto set = drop_plots(fixtures::small_corpus(4, 6), 10, 5, 5);
  const auto path = (std::filesystem::temp_directory_path() / "radarnomaly_attack_test.ndjson").string();
  write_labeled_set(path, set);
  const auto back = read_labeled_set(path, schema);
  CHECK(back.plots == set.plots);
  CHECK(back.provenance.dump() == set.provenance.dump());
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".provenance.json");
}
