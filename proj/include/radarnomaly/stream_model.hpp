#pragma once

// Plot/Track data model, feature schema and the NDJSON wire format.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "radarnomaly/error.hpp"

namespace radarnomaly {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

using TrackId = std::uint64_t;
using Timestamp = std::int64_t;

struct CategoricalFeature {
  std::string name;
  int cardinality = 0;

  bool operator==(const CategoricalFeature&) const = default;
};

struct FeatureSchema {
  std::vector<CategoricalFeature> categorical;
  std::vector<std::string> numerical;
  // One numerical and three categorical names consumed by the timing detector.
  std::vector<std::string> timing;

  bool operator==(const FeatureSchema&) const = default;

  std::size_t categorical_count() const { return categorical.size(); }
  std::size_t numerical_count() const { return numerical.size(); }

  std::optional<std::size_t> categorical_index(std::string_view name) const {
    for (std::size_t i = 0; i < categorical.size(); ++i) {
      if (categorical[i].name == name) return i;
    }
    return std::nullopt;
  }

  std::optional<std::size_t> numerical_index(std::string_view name) const {
    for (std::size_t i = 0; i < numerical.size(); ++i) {
      if (numerical[i] == name) return i;
    }
    return std::nullopt;
  }

  std::size_t total_cardinality() const {
    std::size_t sum = 0;
    for (const auto& c : categorical) sum += static_cast<std::size_t>(c.cardinality);
    return sum;
  }

  /// Index of the timing numerical feature.
  std::size_t timing_numerical() const {
    for (const auto& name : timing) {
      if (auto idx = numerical_index(name)) return *idx;
    }
    throw Error(ErrorKind::schema_violation, "timing feature list has no numerical feature");
  }

  /// Indices of the timing categorical features, in declaration order of `timing`.
  std::vector<std::size_t> timing_categoricals() const {
    std::vector<std::size_t> out;
    for (const auto& name : timing) {
      if (auto idx = categorical_index(name)) out.push_back(*idx);
    }
    return out;
  }

  void validate() const {
    if (categorical.empty()) throw Error(ErrorKind::schema_violation, "no categorical features");
    if (numerical.empty()) throw Error(ErrorKind::schema_violation, "no numerical features");
    std::set<std::string> names;
    for (const auto& c : categorical) {
      if (c.cardinality < 2) {
        throw Error(ErrorKind::schema_violation,
                    "categorical '" + c.name + "' has cardinality < 2");
      }
      if (!names.insert(c.name).second) {
        throw Error(ErrorKind::schema_violation, "duplicate feature name '" + c.name + "'");
      }
    }
    for (const auto& n : numerical) {
      if (!names.insert(n).second) {
        throw Error(ErrorKind::schema_violation, "duplicate feature name '" + n + "'");
      }
    }
    if (timing.size() != 4) {
      throw Error(ErrorKind::schema_violation, "timing must list exactly four feature names");
    }
    std::size_t n_num = 0;
    std::size_t n_cat = 0;
    std::set<std::string> timing_names;
    for (const auto& t : timing) {
      if (!timing_names.insert(t).second) {
        throw Error(ErrorKind::schema_violation, "duplicate timing feature '" + t + "'");
      }
      if (numerical_index(t)) {
        ++n_num;
      } else if (categorical_index(t)) {
        ++n_cat;
      } else {
        throw Error(ErrorKind::schema_violation, "timing feature '" + t + "' is not declared");
      }
    }
    if (n_num != 1 || n_cat != 3) {
      throw Error(ErrorKind::schema_violation,
                  "timing features must be one numerical and three categoricals");
    }
  }
};

inline OrderedJson schema_to_json(const FeatureSchema& schema) {
  OrderedJson j;
  j["categorical"] = OrderedJson::array();
  for (const auto& c : schema.categorical) {
    j["categorical"].push_back({{"name", c.name}, {"cardinality", c.cardinality}});
  }
  j["numerical"] = schema.numerical;
  j["timing"] = schema.timing;
  return j;
}

inline FeatureSchema schema_from_json(const Json& j) {
  FeatureSchema schema;
  try {
    for (const auto& c : j.at("categorical")) {
      schema.categorical.push_back({c.at("name").get<std::string>(), c.at("cardinality").get<int>()});
    }
    schema.numerical = j.at("numerical").get<std::vector<std::string>>();
    schema.timing = j.at("timing").get<std::vector<std::string>>();
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::schema_violation, std::string("bad schema document: ") + e.what());
  }
  schema.validate();
  return schema;
}

inline FeatureSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open schema file " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::schema_violation, "schema file " + path + ": " + e.what());
  }
  return schema_from_json(j);
}

/// 64-bit FNV-1a of the canonical schema document, rendered as hex.
inline std::string schema_fingerprint(const FeatureSchema& schema) {
  const std::string canonical = schema_to_json(schema).dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[hash & 0xf];
    hash >>= 4;
  }
  return out;
}

/// Ten categoricals (five signal-property features plus the five named
/// operational ones) and seventeen location-derived numericals.
inline FeatureSchema default_schema() {
  FeatureSchema schema;
  schema.categorical = {
      {"sigShape", 4},     {"sigPolarity", 4},    {"sigBand", 3},
      {"sigDoppler", 3},   {"sigFade", 5},        {"alertRaised", 2},
      {"objectCategory", 2}, {"objectType", 6},   {"trackType", 3},
      {"signalQuality", 4},
  };
  for (int i = 1; i <= 17; ++i) schema.numerical.push_back("num" + std::to_string(i));
  schema.timing = {"num1", "objectType", "signalQuality", "trackType"};
  return schema;
}

struct PlotRecord {
  std::string session_id;
  TrackId track_id = 0;
  Timestamp update_time = 0;
  std::vector<int> cat_values;
  std::vector<double> num_values;

  bool operator==(const PlotRecord&) const = default;
};

inline void validate_plot(const PlotRecord& plot, const FeatureSchema& schema) {
  if (plot.cat_values.size() != schema.categorical.size()) {
    throw Error(ErrorKind::schema_violation,
                "expected " + std::to_string(schema.categorical.size()) + " categorical values, got " +
                    std::to_string(plot.cat_values.size()));
  }
  if (plot.num_values.size() != schema.numerical.size()) {
    throw Error(ErrorKind::schema_violation,
                "expected " + std::to_string(schema.numerical.size()) + " numerical values, got " +
                    std::to_string(plot.num_values.size()));
  }
  if (plot.update_time < 0) throw Error(ErrorKind::schema_violation, "negative update time");
  for (std::size_t i = 0; i < plot.cat_values.size(); ++i) {
    const int v = plot.cat_values[i];
    if (v < 0 || v >= schema.categorical[i].cardinality) {
      throw Error(ErrorKind::schema_violation,
                  "categorical '" + schema.categorical[i].name + "' value " + std::to_string(v) +
                      " outside [0, " + std::to_string(schema.categorical[i].cardinality) + ")");
    }
  }
  for (std::size_t i = 0; i < plot.num_values.size(); ++i) {
    if (!std::isfinite(plot.num_values[i])) {
      throw Error(ErrorKind::schema_violation, "numerical '" + schema.numerical[i] + "' is not finite");
    }
  }
}

inline OrderedJson plot_to_json(const PlotRecord& plot) {
  OrderedJson j;
  j["session"] = plot.session_id;
  j["track_id"] = plot.track_id;
  j["t"] = plot.update_time;
  j["cat"] = plot.cat_values;
  j["num"] = plot.num_values;
  return j;
}

inline std::string serialize_plot(const PlotRecord& plot) { return plot_to_json(plot).dump(); }

namespace detail {

template <typename J>
PlotRecord plot_from_object(const J& j, const FeatureSchema& schema) {
  if (!j.is_object()) throw Error(ErrorKind::malformed_line, "line is not a JSON object");
  for (const char* key : {"session", "track_id", "t", "cat", "num"}) {
    if (!j.contains(key)) throw Error(ErrorKind::schema_violation, std::string("missing field '") + key + "'");
  }
  PlotRecord plot;
  const auto& session = j.at("session");
  if (!session.is_string()) throw Error(ErrorKind::schema_violation, "'session' must be a string");
  plot.session_id = session.template get<std::string>();

  const auto& track = j.at("track_id");
  if (track.is_number_unsigned()) {
    plot.track_id = track.template get<TrackId>();
  } else if (track.is_number_integer() && track.template get<std::int64_t>() >= 0) {
    plot.track_id = static_cast<TrackId>(track.template get<std::int64_t>());
  } else {
    throw Error(ErrorKind::schema_violation, "'track_id' must be a non-negative integer");
  }

  const auto& t = j.at("t");
  if (!t.is_number_integer()) throw Error(ErrorKind::schema_violation, "'t' must be an integer");
  if (t.is_number_unsigned()) {
    plot.update_time = static_cast<Timestamp>(t.template get<std::uint64_t>());
  } else {
    plot.update_time = t.template get<std::int64_t>();
  }

  const auto& cat = j.at("cat");
  if (!cat.is_array()) throw Error(ErrorKind::schema_violation, "'cat' must be an array");
  for (const auto& v : cat) {
    if (!v.is_number_integer()) throw Error(ErrorKind::schema_violation, "categorical values must be integers");
    plot.cat_values.push_back(v.template get<int>());
  }
  const auto& num = j.at("num");
  if (!num.is_array()) throw Error(ErrorKind::schema_violation, "'num' must be an array");
  for (const auto& v : num) {
    if (!v.is_number()) throw Error(ErrorKind::schema_violation, "numerical values must be numbers");
    plot.num_values.push_back(v.template get<double>());
  }
  validate_plot(plot, schema);
  return plot;
}

inline Json parse_json_line(std::string_view line) {
  try {
    return Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::malformed_line, e.what());
  }
}

}  // namespace detail

inline PlotRecord parse_plot_line(std::string_view line, const FeatureSchema& schema) {
  return detail::plot_from_object(detail::parse_json_line(line), schema);
}

struct Track {
  std::string session_id;
  TrackId track_id = 0;
  std::vector<PlotRecord> plots;

  std::size_t size() const { return plots.size(); }

  bool operator==(const Track&) const = default;
};

struct SessionStore {
  std::map<std::string, std::vector<Track>> sessions;

  std::size_t plot_count() const {
    std::size_t n = 0;
    for (const auto& [id, tracks] : sessions) {
      for (const auto& t : tracks) n += t.plots.size();
    }
    return n;
  }

  std::size_t plot_count(const std::string& session) const {
    std::size_t n = 0;
    auto it = sessions.find(session);
    if (it == sessions.end()) return 0;
    for (const auto& t : it->second) n += t.plots.size();
    return n;
  }

  std::size_t track_count() const {
    std::size_t n = 0;
    for (const auto& [id, tracks] : sessions) n += tracks.size();
    return n;
  }

  std::vector<Track> all_tracks() const {
    std::vector<Track> out;
    for (const auto& [id, tracks] : sessions) out.insert(out.end(), tracks.begin(), tracks.end());
    return out;
  }

  bool operator==(const SessionStore&) const = default;
};

/// Groups plots by (session, track); each track is time-ordered with ties kept
/// in arrival order. Tracks are ordered by track id within a session.
inline SessionStore assemble_tracks(std::span<const PlotRecord> plots) {
  std::map<std::pair<std::string, TrackId>, std::vector<PlotRecord>> groups;
  for (const auto& p : plots) groups[{p.session_id, p.track_id}].push_back(p);

  SessionStore store;
  for (auto& [key, group] : groups) {
    std::stable_sort(group.begin(), group.end(),
                     [](const PlotRecord& a, const PlotRecord& b) { return a.update_time < b.update_time; });
    store.sessions[key.first].push_back(Track{key.first, key.second, std::move(group)});
  }
  return store;
}

/// Flattens a store into one stream ordered by update time (ties: session, track, position).
inline std::vector<PlotRecord> flatten_chronological(const SessionStore& store) {
  struct Ref {
    const PlotRecord* plot;
    std::size_t order;
  };
  std::vector<Ref> refs;
  std::size_t order = 0;
  for (const auto& [id, tracks] : store.sessions) {
    for (const auto& t : tracks) {
      for (const auto& p : t.plots) refs.push_back({&p, order++});
    }
  }
  std::stable_sort(refs.begin(), refs.end(), [](const Ref& a, const Ref& b) {
    return a.plot->update_time < b.plot->update_time;
  });
  std::vector<PlotRecord> out;
  out.reserve(refs.size());
  for (const auto& r : refs) out.push_back(*r.plot);
  return out;
}

/// Time differences between consecutive plots; the first entry copies the second.
inline std::vector<double> updating_periods(const Track& track) {
  if (track.plots.size() < 2) {
    throw Error(ErrorKind::track_too_short, "updating periods need at least two plots");
  }
  std::vector<double> out(track.plots.size());
  for (std::size_t j = 1; j < track.plots.size(); ++j) {
    out[j] = static_cast<double>(track.plots[j].update_time - track.plots[j - 1].update_time);
  }
  out[0] = out[1];
  return out;
}

/// Reads every plot line of an NDJSON file; blank lines are ignored.
inline std::vector<PlotRecord> read_plot_file(const std::string& path, const FeatureSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  std::vector<PlotRecord> plots;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      plots.push_back(parse_plot_line(line, schema));
    } catch (const Error& e) {
      throw Error(e.kind(), path + ":" + std::to_string(line_no) + ": " + e.message());
    }
  }
  return plots;
}

inline void write_plot_file(const std::string& path, std::span<const PlotRecord> plots) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path);
  for (const auto& p : plots) out << serialize_plot(p) << '\n';
  if (!out) throw Error(ErrorKind::io, "write failed for " + path);
}

/// Expands directories to their *.ndjson files (sorted by name) and reads
/// every plot into one store.
inline SessionStore load_corpus(std::span<const std::string> paths, const FeatureSchema& schema) {
  std::vector<std::string> files;
  for (const auto& p : paths) {
    std::error_code ec;
    if (std::filesystem::is_directory(p, ec)) {
      std::vector<std::string> found;
      for (const auto& entry : std::filesystem::directory_iterator(p, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".ndjson") found.push_back(entry.path().string());
      }
      if (ec) throw Error(ErrorKind::io, "cannot list " + p + ": " + ec.message());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(p);
    }
  }
  if (files.empty()) throw Error(ErrorKind::io, "no plot files found");
  std::vector<PlotRecord> plots;
  for (const auto& f : files) {
    auto part = read_plot_file(f, schema);
    plots.insert(plots.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return assemble_tracks(plots);
}

}  // namespace radarnomaly
