#pragma once

// Deterministic generator of benign radar-style sessions.
//
// Every track follows a latent kinematic state (position, velocity, gentle
// turn) from which all seventeen numericals are derived, so numericals are
// mutually consistent. Categoricals are drawn from per-track-type tables whose
// row is selected by a context: nothing, the track's speed class, the current
// range band, or the value of another categorical. That ties the operational
// categoricals to the kinematics and to each other.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "radarnomaly/stream_model.hpp"

namespace radarnomaly {

enum class ContextRule { none, speed_class, range_band, feature };

struct CategoricalRule {
  ContextRule rule = ContextRule::none;
  std::string source;  // categorical name for ContextRule::feature
};

struct TrackTypeSpec {
  std::string name;
  double weight = 1.0;
  double speed_min = 0.0;  // distance units per second
  double speed_max = 0.0;
  double altitude_min = 0.0;
  double altitude_max = 0.0;
  double range_min = 0.0;
  double range_max = 0.0;
  double reflectivity = 1.0;
  double base_period = 100.0;  // time units
  double jitter = 0.0;         // fraction of the base period
  // categorical name -> rows (one per context value) of value probabilities
  std::map<std::string, std::vector<std::vector<double>>> tables;
};

struct SynthConfig {
  FeatureSchema schema;
  std::vector<TrackTypeSpec> types;
  std::map<std::string, CategoricalRule> rules;  // missing entries mean ContextRule::none
  std::vector<double> range_bands;               // ascending edges, as fractions of a type's range span
  std::size_t session_count = 4;
  std::size_t tracks_per_session = 50;
  std::vector<std::size_t> session_plot_targets;  // when set, overrides the two counts above
  std::size_t min_length = 20;
  std::size_t max_length = 60;
  double flip_probability = 0.01;
  double noise_fraction = 0.01;
  // Share of update periods drawn across the whole jitter band; the rest
  // scatter tightly around the base period.
  double irregular_probability = 0.03;
  // Chance that a scan produces no plot, so the next period spans two scans.
  double miss_probability = 0.01;
  double time_units_per_second = 100.0;
  std::uint64_t seed = 42;

  std::size_t sessions() const {
    return session_plot_targets.empty() ? session_count : session_plot_targets.size();
  }

  std::size_t context_cardinality(const CategoricalRule& r) const {
    switch (r.rule) {
      case ContextRule::none: return 1;
      case ContextRule::speed_class: return 2;
      case ContextRule::range_band: return range_bands.size() + 1;
      case ContextRule::feature: {
        auto idx = schema.categorical_index(r.source);
        return idx ? static_cast<std::size_t>(schema.categorical[*idx].cardinality) : 0;
      }
    }
    return 0;
  }

  CategoricalRule rule_for(const std::string& name) const {
    auto it = rules.find(name);
    return it == rules.end() ? CategoricalRule{} : it->second;
  }

  /// Categorical indices ordered so every feature-context source comes first.
  std::vector<std::size_t> draw_order() const {
    std::vector<std::size_t> order;
    std::set<std::size_t> done;
    const std::size_t n = schema.categorical.size();
    while (order.size() < n) {
      bool progressed = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (done.contains(i)) continue;
        const auto r = rule_for(schema.categorical[i].name);
        if (r.rule == ContextRule::feature) {
          auto src = schema.categorical_index(r.source);
          if (!src) throw Error(ErrorKind::invalid_config, "rule source '" + r.source + "' is not a categorical");
          if (!done.contains(*src)) continue;
        }
        order.push_back(i);
        done.insert(i);
        progressed = true;
      }
      if (!progressed) throw Error(ErrorKind::invalid_config, "categorical context rules form a cycle");
    }
    return order;
  }

  void validate() const {
    schema.validate();
    if (schema.numerical.size() != 17) {
      throw Error(ErrorKind::invalid_config, "schema.numerical: generator derives exactly 17 numericals");
    }
    if (types.empty()) throw Error(ErrorKind::invalid_config, "types: at least one track type required");
    if (sessions() == 0) throw Error(ErrorKind::invalid_config, "session_count: must be positive");
    if (session_plot_targets.empty() && tracks_per_session == 0) {
      throw Error(ErrorKind::invalid_config, "tracks_per_session: must be positive");
    }
    if (min_length < 7) throw Error(ErrorKind::invalid_config, "min_length: must be at least K+2 = 7");
    if (max_length < min_length) throw Error(ErrorKind::invalid_config, "max_length: must be >= min_length");
    if (!session_plot_targets.empty() && 2 * min_length > max_length) {
      throw Error(ErrorKind::invalid_config, "max_length: plot targets need max_length >= 2 * min_length");
    }
    for (std::size_t target : session_plot_targets) {
      if (target < min_length) throw Error(ErrorKind::invalid_config, "session_plot_targets: below min_length");
    }
    if (!(flip_probability >= 0.0 && flip_probability < 1.0)) {
      throw Error(ErrorKind::invalid_config, "flip_probability: must lie in [0,1)");
    }
    if (!(noise_fraction >= 0.0)) throw Error(ErrorKind::invalid_config, "noise_fraction: must be non-negative");
    if (!(irregular_probability >= 0.0 && irregular_probability <= 1.0)) {
      throw Error(ErrorKind::invalid_config, "irregular_probability: must lie in [0,1]");
    }
    if (!(miss_probability >= 0.0 && miss_probability < 1.0)) {
      throw Error(ErrorKind::invalid_config, "miss_probability: must lie in [0,1)");
    }
    if (!(time_units_per_second > 0.0)) throw Error(ErrorKind::invalid_config, "time_units_per_second: must be positive");
    for (std::size_t i = 1; i < range_bands.size(); ++i) {
      if (!(range_bands[i] > range_bands[i - 1])) throw Error(ErrorKind::invalid_config, "range_bands: must ascend");
    }
    (void)draw_order();
    for (const auto& t : types) {
      const std::string where = "types[" + t.name + "].";
      if (!(t.weight > 0.0)) throw Error(ErrorKind::invalid_config, where + "weight: must be positive");
      if (!(t.base_period >= 1.0)) throw Error(ErrorKind::invalid_config, where + "base_period: must be >= 1");
      if (!(t.jitter >= 0.0 && t.jitter < 0.5)) throw Error(ErrorKind::invalid_config, where + "jitter: must lie in [0, 0.5)");
      if (!(t.speed_min >= 0.0 && t.speed_max >= t.speed_min)) throw Error(ErrorKind::invalid_config, where + "speed range");
      if (!(t.altitude_min >= 0.0 && t.altitude_max >= t.altitude_min)) {
        throw Error(ErrorKind::invalid_config, where + "altitude range");
      }
      if (!(t.range_min > t.altitude_max && t.range_max > t.range_min)) {
        throw Error(ErrorKind::invalid_config, where + "range: range_min must exceed altitude_max");
      }
      for (const auto& c : schema.categorical) {
        auto it = t.tables.find(c.name);
        if (it == t.tables.end()) throw Error(ErrorKind::invalid_config, where + "tables." + c.name + ": missing");
        const std::size_t rows = context_cardinality(rule_for(c.name));
        if (it->second.size() != rows) {
          throw Error(ErrorKind::invalid_config, where + "tables." + c.name + ": expected " + std::to_string(rows) + " rows");
        }
        for (const auto& row : it->second) {
          if (row.size() != static_cast<std::size_t>(c.cardinality)) {
            throw Error(ErrorKind::invalid_config, where + "tables." + c.name + ": row width != cardinality");
          }
          double sum = 0.0;
          for (double p : row) {
            if (!(p >= 0.0)) throw Error(ErrorKind::invalid_config, where + "tables." + c.name + ": negative probability");
            sum += p;
          }
          if (std::abs(sum - 1.0) > 1e-9) {
            throw Error(ErrorKind::invalid_config, where + "tables." + c.name + ": row does not sum to 1");
          }
        }
      }
    }
  }
};

namespace detail {

inline std::vector<double> peaked_row(std::size_t width, std::size_t peak, double mass) {
  std::vector<double> row(width, width > 1 ? (1.0 - mass) / static_cast<double>(width - 1) : 1.0);
  row[peak] = width > 1 ? mass : 1.0;
  return row;
}

}  // namespace detail

/// Three track types (ground vehicle, aircraft, drone) over the default schema.
inline SynthConfig default_synth_config(std::uint64_t seed = 42) {
  using detail::peaked_row;
  SynthConfig c;
  c.schema = default_schema();
  c.seed = seed;
  c.range_bands = {0.25, 0.5, 0.75};
  c.rules["objectType"] = {ContextRule::speed_class, ""};
  c.rules["objectCategory"] = {ContextRule::feature, "objectType"};
  c.rules["alertRaised"] = {ContextRule::feature, "objectCategory"};
  c.rules["signalQuality"] = {ContextRule::range_band, ""};
  c.rules["sigDoppler"] = {ContextRule::speed_class, ""};
  c.rules["sigFade"] = {ContextRule::range_band, ""};

  struct Kinematics {
    const char* name;
    double speed_min, speed_max, alt_min, alt_max, range_min, range_max, reflectivity, period;
  };
  const Kinematics kin[] = {
      {"ground", 0.005, 0.025, 0.0, 0.05, 2.0, 30.0, 4.0, 400.0},
      {"aircraft", 0.15, 0.30, 2.0, 10.0, 30.0, 150.0, 20.0, 100.0},
      {"drone", 0.02, 0.06, 0.1, 1.0, 1.5, 15.0, 0.3, 250.0},
  };
  // Object types 2t (slow) and 2t+1 (fast) belong to track type t; these are hostile.
  const std::set<int> hostile{1, 3, 4};

  for (std::size_t t = 0; t < 3; ++t) {
    TrackTypeSpec spec;
    spec.name = kin[t].name;
    spec.weight = 1.0;
    spec.speed_min = kin[t].speed_min;
    spec.speed_max = kin[t].speed_max;
    spec.altitude_min = kin[t].alt_min;
    spec.altitude_max = kin[t].alt_max;
    spec.range_min = kin[t].range_min;
    spec.range_max = kin[t].range_max;
    spec.reflectivity = kin[t].reflectivity;
    spec.base_period = kin[t].period;
    spec.jitter = 0.2;

    spec.tables["sigShape"] = {peaked_row(4, t, 1.0)};
    spec.tables["sigPolarity"] = {peaked_row(4, (t + 1) % 4, 1.0)};
    spec.tables["sigBand"] = {peaked_row(3, t, 1.0)};
    spec.tables["sigDoppler"] = {peaked_row(3, 0, 1.0), peaked_row(3, t == 0 ? 1 : 2, 1.0)};
    spec.tables["sigFade"] = {peaked_row(5, 0, 1.0), peaked_row(5, 1, 1.0), peaked_row(5, 2, 1.0),
                              peaked_row(5, 3 + t % 2, 1.0)};
    spec.tables["trackType"] = {peaked_row(3, t, 1.0)};
    spec.tables["objectType"] = {peaked_row(6, 2 * t, 1.0), peaked_row(6, 2 * t + 1, 1.0)};
    std::vector<std::vector<double>> category;
    for (int ot = 0; ot < 6; ++ot) category.push_back(peaked_row(2, hostile.contains(ot) ? 1 : 0, 1.0));
    spec.tables["objectCategory"] = category;
    spec.tables["alertRaised"] = {peaked_row(2, 0, 1.0), peaked_row(2, 1, 1.0)};
    spec.tables["signalQuality"] = {peaked_row(4, 3, 1.0), peaked_row(4, 2, 1.0), peaked_row(4, 1, 1.0),
                                    peaked_row(4, 0, 1.0)};
    c.types.push_back(std::move(spec));
  }
  return c;
}

/// Default corpus shape: four sessions at 1/20 of the reference recording sizes.
inline SynthConfig default_corpus_config(std::uint64_t seed) {
  SynthConfig c = default_synth_config(seed);
  c.session_plot_targets = {2286, 1151, 598, 478};
  c.min_length = 8;
  c.max_length = 36;
  c.session_count = c.session_plot_targets.size();
  return c;
}

namespace detail {

inline std::size_t draw_from(const std::vector<double>& row, std::mt19937_64& rng) {
  std::discrete_distribution<std::size_t> dist(row.begin(), row.end());
  return dist(rng);
}

inline std::vector<std::size_t> track_lengths(const SynthConfig& c, std::size_t session_index, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> len(c.min_length, c.max_length);
  std::vector<std::size_t> out;
  if (c.session_plot_targets.empty()) {
    for (std::size_t k = 0; k < c.tracks_per_session; ++k) out.push_back(len(rng));
    return out;
  }
  std::size_t remaining = c.session_plot_targets[session_index];
  while (remaining >= c.max_length + c.min_length) {
    out.push_back(std::min(len(rng), remaining - c.min_length));
    remaining -= out.back();
  }
  if (remaining <= c.max_length) {
    out.push_back(remaining);
  } else {
    out.push_back(remaining / 2);
    out.push_back(remaining - remaining / 2);
  }
  return out;
}

struct KinematicState {
  double x, y, z, heading, speed, climb, turn_rate;
};

inline std::vector<double> derive_numericals(const KinematicState& s, double reflectivity) {
  const double vx = s.speed * std::cos(s.heading);
  const double vy = s.speed * std::sin(s.heading);
  const double vz = s.climb;
  const double ground = std::hypot(s.x, s.y);
  const double range = std::sqrt(ground * ground + s.z * s.z);
  const double speed = std::sqrt(vx * vx + vy * vy + vz * vz);
  const double radial = (s.x * vx + s.y * vy + s.z * vz) / range;
  const double tangential = std::sqrt(std::max(0.0, speed * speed - radial * radial));
  return {
      s.x / range,                         // num1 direction cosine x
      range,                               // num2
      s.y / range,                         // num3 direction cosine y
      s.z,                                 // num4 altitude
      ground,                              // num5
      vx,                                  // num6
      vy,                                  // num7
      vz,                                  // num8
      speed,                               // num9
      radial,                              // num10
      tangential,                          // num11
      s.z / range,                         // num12 elevation sine
      reflectivity / (1.0 + range * range / 100.0),  // num13 received strength
      speed * s.z,                         // num14
      s.x + s.y,                           // num15
      (s.x * vy - s.y * vx) / range,       // num16
      std::log1p(1000.0 * speed),          // num17
  };
}

inline std::size_t context_value(const SynthConfig& c, const CategoricalRule& rule, int speed_class, double relative_range,
                                 const std::vector<int>& cats) {
  switch (rule.rule) {
    case ContextRule::none: return 0;
    case ContextRule::speed_class: return static_cast<std::size_t>(speed_class);
    case ContextRule::range_band: {
      return static_cast<std::size_t>(std::upper_bound(c.range_bands.begin(), c.range_bands.end(), relative_range) -
                                      c.range_bands.begin());
    }
    case ContextRule::feature: return static_cast<std::size_t>(cats[*c.schema.categorical_index(rule.source)]);
  }
  return 0;
}

}  // namespace detail

inline std::string session_name(std::size_t session_index) { return "R" + std::to_string(session_index + 1); }

/// Tracks of one session; a pure function of (config, session_index).
inline std::vector<Track> generate_session(const SynthConfig& config, std::size_t session_index) {
  config.validate();
  if (session_index >= config.sessions()) throw Error(ErrorKind::invalid_config, "session index out of range");
  const auto& schema = config.schema;
  std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                    static_cast<std::uint32_t>(session_index)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> type_weights;
  for (const auto& t : config.types) type_weights.push_back(t.weight);
  const auto order = config.draw_order();
  const std::string session = session_name(session_index);
  const auto lengths = detail::track_lengths(config, session_index, rng);

  std::vector<Track> tracks;
  double start_time = std::floor(unit(rng) * 1000.0);
  for (std::size_t k = 0; k < lengths.size(); ++k) {
    const std::size_t type_index = detail::draw_from(type_weights, rng);
    const auto& type = config.types[type_index];
    const int speed_class = unit(rng) < 0.5 ? 0 : 1;
    const double span = type.speed_max - type.speed_min;
    const double speed = speed_class == 0 ? type.speed_min + 0.4 * span * unit(rng)
                                          : type.speed_min + (0.6 + 0.4 * unit(rng)) * span;
    const double altitude = type.altitude_min + (type.altitude_max - type.altitude_min) * unit(rng);
    const double range = type.range_min + (type.range_max - type.range_min) * unit(rng);
    const double azimuth = 2.0 * std::numbers::pi * unit(rng);
    const double ground = std::sqrt(range * range - altitude * altitude);
    detail::KinematicState state{ground * std::cos(azimuth), ground * std::sin(azimuth), altitude,
                                 2.0 * std::numbers::pi * unit(rng), speed,
                                 (unit(rng) - 0.5) * 0.02 * speed, (unit(rng) - 0.5) * 0.02};

    Track track;
    track.session_id = session;
    track.track_id = static_cast<TrackId>(k + 1);
    std::vector<int> base(schema.categorical.size(), 0);
    std::vector<std::size_t> contexts(schema.categorical.size(), 0);
    auto redraw = [&](double current_range, bool force) {
      const double relative_range = (current_range - type.range_min) / (type.range_max - type.range_min);
      for (std::size_t idx : order) {
        const auto& name = schema.categorical[idx].name;
        const auto rule = config.rule_for(name);
        const std::size_t ctx = detail::context_value(config, rule, speed_class, relative_range, base);
        if (force || ctx != contexts[idx]) {
          contexts[idx] = ctx;
          base[idx] = static_cast<int>(detail::draw_from(type.tables.at(name)[ctx], rng));
        }
      }
    };

    double time = start_time;
    double duration = 0.0;
    for (std::size_t j = 0; j < lengths[k]; ++j) {
      if (j > 0) {
        const double shape = unit(rng) < config.irregular_probability ? 2.0 * unit(rng) - 1.0
                                                                      : std::clamp(0.1 * gauss(rng), -1.0, 1.0);
        const double scans = unit(rng) < config.miss_probability ? 2.0 : 1.0;
        const double period = std::max(1.0, std::round(type.base_period * (scans + type.jitter * shape)));
        time += period;
        duration += period;
        const double dt = period / config.time_units_per_second;
        state.heading += state.turn_rate * dt;
        state.x += state.speed * std::cos(state.heading) * dt;
        state.y += state.speed * std::sin(state.heading) * dt;
        state.z = std::max(0.0, state.z + state.climb * dt);
      }
      const double current_range = std::sqrt(state.x * state.x + state.y * state.y + state.z * state.z);
      redraw(current_range, j == 0);

      PlotRecord plot;
      plot.session_id = session;
      plot.track_id = track.track_id;
      plot.update_time = static_cast<Timestamp>(time);
      plot.cat_values = base;
      for (std::size_t f = 0; f < plot.cat_values.size(); ++f) {
        if (unit(rng) < config.flip_probability) {
          const int card = schema.categorical[f].cardinality;
          std::uniform_int_distribution<int> other(0, card - 2);
          const int v = other(rng);
          plot.cat_values[f] = v >= base[f] ? v + 1 : v;
        }
      }
      plot.num_values = detail::derive_numericals(state, type.reflectivity);
      for (double& v : plot.num_values) v *= 1.0 + config.noise_fraction * gauss(rng);
      track.plots.push_back(std::move(plot));
    }
    tracks.push_back(std::move(track));
    start_time += std::floor(duration * (0.3 + 0.4 * unit(rng)));
  }
  return tracks;
}

inline SessionStore generate_corpus(const SynthConfig& config) {
  config.validate();
  SessionStore store;
  for (std::size_t s = 0; s < config.sessions(); ++s) store.sessions[session_name(s)] = generate_session(config, s);
  return store;
}

inline SessionStore default_corpus(std::uint64_t seed) { return generate_corpus(default_corpus_config(seed)); }

// ---------------------------------------------------------------------------
// Config file

inline std::string to_string(ContextRule r) {
  switch (r) {
    case ContextRule::none: return "none";
    case ContextRule::speed_class: return "speed_class";
    case ContextRule::range_band: return "range_band";
    case ContextRule::feature: return "feature";
  }
  return "none";
}

inline OrderedJson to_json(const SynthConfig& c) {
  OrderedJson j;
  j["schema"] = schema_to_json(c.schema);
  j["seed"] = c.seed;
  j["session_count"] = c.session_count;
  j["tracks_per_session"] = c.tracks_per_session;
  j["session_plot_targets"] = c.session_plot_targets;
  j["min_length"] = c.min_length;
  j["max_length"] = c.max_length;
  j["flip_probability"] = c.flip_probability;
  j["noise_fraction"] = c.noise_fraction;
  j["irregular_probability"] = c.irregular_probability;
  j["miss_probability"] = c.miss_probability;
  j["time_units_per_second"] = c.time_units_per_second;
  j["range_bands"] = c.range_bands;
  OrderedJson rules = OrderedJson::object();
  for (const auto& [name, r] : c.rules) {
    OrderedJson rj{{"context", to_string(r.rule)}};
    if (r.rule == ContextRule::feature) rj["source"] = r.source;
    rules[name] = rj;
  }
  j["rules"] = rules;
  j["types"] = OrderedJson::array();
  for (const auto& t : c.types) {
    OrderedJson tj;
    tj["name"] = t.name;
    tj["weight"] = t.weight;
    tj["speed"] = {t.speed_min, t.speed_max};
    tj["altitude"] = {t.altitude_min, t.altitude_max};
    tj["range"] = {t.range_min, t.range_max};
    tj["reflectivity"] = t.reflectivity;
    tj["base_period"] = t.base_period;
    tj["jitter"] = t.jitter;
    OrderedJson tables = OrderedJson::object();
    for (const auto& cat : c.schema.categorical) {
      if (auto it = t.tables.find(cat.name); it != t.tables.end()) tables[cat.name] = it->second;
    }
    tj["tables"] = tables;
    j["types"].push_back(tj);
  }
  return j;
}

/// Parses a generator config; absent keys keep the default config's values.
inline SynthConfig synth_config_from_json(const Json& j) {
  SynthConfig c = default_corpus_config(42);
  auto field = [&](const char* name, auto& target) {
    if (!j.contains(name)) return;
    try {
      target = j.at(name).get<std::remove_reference_t<decltype(target)>>();
    } catch (const Json::exception&) {
      throw Error(ErrorKind::invalid_config, std::string(name) + ": wrong type");
    }
  };
  if (!j.is_object()) throw Error(ErrorKind::invalid_config, "config must be a JSON object");
  if (j.contains("schema")) c.schema = schema_from_json(j.at("schema"));
  field("seed", c.seed);
  field("session_count", c.session_count);
  field("tracks_per_session", c.tracks_per_session);
  field("session_plot_targets", c.session_plot_targets);
  if (j.contains("session_count") && !j.contains("session_plot_targets")) c.session_plot_targets.clear();
  field("min_length", c.min_length);
  field("max_length", c.max_length);
  field("flip_probability", c.flip_probability);
  field("noise_fraction", c.noise_fraction);
  field("irregular_probability", c.irregular_probability);
  field("miss_probability", c.miss_probability);
  field("time_units_per_second", c.time_units_per_second);
  field("range_bands", c.range_bands);
  if (j.contains("rules")) {
    c.rules.clear();
    for (const auto& [name, rj] : j.at("rules").items()) {
      const std::string ctx = rj.value("context", std::string("none"));
      CategoricalRule r;
      if (ctx == "none") r.rule = ContextRule::none;
      else if (ctx == "speed_class") r.rule = ContextRule::speed_class;
      else if (ctx == "range_band") r.rule = ContextRule::range_band;
      else if (ctx == "feature") r.rule = ContextRule::feature;
      else throw Error(ErrorKind::invalid_config, "rules." + name + ".context: unknown '" + ctx + "'");
      r.source = rj.value("source", std::string());
      c.rules[name] = r;
    }
  }
  if (j.contains("types")) {
    c.types.clear();
    for (const auto& tj : j.at("types")) {
      TrackTypeSpec t;
      try {
        t.name = tj.at("name").get<std::string>();
        t.weight = tj.value("weight", 1.0);
        t.speed_min = tj.at("speed").at(0).get<double>();
        t.speed_max = tj.at("speed").at(1).get<double>();
        t.altitude_min = tj.at("altitude").at(0).get<double>();
        t.altitude_max = tj.at("altitude").at(1).get<double>();
        t.range_min = tj.at("range").at(0).get<double>();
        t.range_max = tj.at("range").at(1).get<double>();
        t.reflectivity = tj.value("reflectivity", 1.0);
        t.base_period = tj.at("base_period").get<double>();
        t.jitter = tj.value("jitter", 0.0);
        t.tables = tj.at("tables").get<std::map<std::string, std::vector<std::vector<double>>>>();
      } catch (const Json::exception& e) {
        throw Error(ErrorKind::invalid_config, "types: " + std::string(e.what()));
      }
      c.types.push_back(std::move(t));
    }
  }
  c.validate();
  return c;
}

inline SynthConfig load_synth_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::invalid_config, "config " + path + ": " + e.what());
  }
  return synth_config_from_json(j);
}

}  // namespace radarnomaly
