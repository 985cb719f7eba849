#pragma once

// Labelled attack test sets built from benign sessions: whole-track
// categorical manipulation and consecutive plot dropping.

#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "radarnomaly/stream_model.hpp"

namespace radarnomaly {

/// Session-id suffix of duplicated tracks so that a copy never merges with
/// its original.
inline constexpr std::string_view kDuplicateSessionSuffix = "+dup";

inline const std::string kBenignAttack = "none";
inline const std::string kDropAttack = "drop";

inline std::string manipulation_attack(const std::string& feature) { return "manipulate:" + feature; }

struct LabeledPlot {
  PlotRecord plot;
  int label = 0;
  std::string attack = kBenignAttack;

  bool operator==(const LabeledPlot&) const = default;
};

struct LabeledTestSet {
  std::vector<LabeledPlot> plots;
  OrderedJson provenance;

  std::size_t positives() const {
    std::size_t n = 0;
    for (const auto& p : plots) n += p.label == 1 ? 1 : 0;
    return n;
  }
  std::size_t negatives() const { return plots.size() - positives(); }

  std::vector<PlotRecord> records() const {
    std::vector<PlotRecord> out;
    out.reserve(plots.size());
    for (const auto& p : plots) out.push_back(p.plot);
    return out;
  }
};

/// Most frequent value of a categorical over a track; ties go to the smaller value.
inline int modal_value(const Track& track, std::size_t feature, int cardinality) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(cardinality), 0);
  for (const auto& p : track.plots) ++counts[static_cast<std::size_t>(p.cat_values[feature])];
  int best = 0;
  for (int v = 1; v < cardinality; ++v) {
    if (counts[static_cast<std::size_t>(v)] > counts[static_cast<std::size_t>(best)]) best = v;
  }
  return best;
}

/// Duplicates every track; in each copy the feature is overwritten on every
/// plot with one value, drawn uniformly among values other than the track's
/// modal value. Originals are labelled 0, copies 1.
inline LabeledTestSet manipulate_categorical(const SessionStore& benign, const FeatureSchema& schema,
                                             const std::string& feature, std::uint64_t seed) {
  const auto idx = schema.categorical_index(feature);
  if (!idx) throw Error(ErrorKind::unknown_feature, "'" + feature + "' is not a categorical feature");
  const int card = schema.categorical[*idx].cardinality;
  if (card < 2) throw Error(ErrorKind::cardinality_one, "'" + feature + "' has a single value");

  const std::string attack = manipulation_attack(feature);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> other(0, card - 2);

  LabeledTestSet out;
  std::vector<LabeledPlot> forged;
  OrderedJson plan = OrderedJson::array();
  for (const auto& [session, tracks] : benign.sessions) {
    for (const auto& track : tracks) {
      for (const auto& p : track.plots) out.plots.push_back({p, 0, kBenignAttack});
      const int modal = modal_value(track, *idx, card);
      const int drawn = other(rng);
      const int value = drawn >= modal ? drawn + 1 : drawn;
      for (const auto& p : track.plots) {
        LabeledPlot lp{p, 1, attack};
        lp.plot.session_id += kDuplicateSessionSuffix;
        lp.plot.cat_values[*idx] = value;
        forged.push_back(std::move(lp));
      }
      plan.push_back({{"session", session},
                      {"track_id", track.track_id},
                      {"modal_value", modal},
                      {"value", value},
                      {"plots", track.plots.size()}});
    }
  }
  out.plots.insert(out.plots.end(), std::make_move_iterator(forged.begin()), std::make_move_iterator(forged.end()));
  out.provenance = {{"attack", attack},
                    {"feature", feature},
                    {"seed", seed},
                    {"duplicate_session_suffix", std::string(kDuplicateSessionSuffix)},
                    {"positives", out.positives()},
                    {"negatives", out.negatives()},
                    {"tracks", plan}};
  return out;
}

struct DropOutcome {
  Track track;             // survivors in original order
  std::size_t labeled = 0;  // index in `track` of the plot following the gap
  std::size_t dropped = 0;
};

/// Drops min(|T| - i - 1, r) consecutive plots starting at index i.
inline DropOutcome apply_drop(const Track& track, std::size_t start, std::size_t budget) {
  if (start + 1 >= track.plots.size()) throw Error(ErrorKind::track_too_short, "drop start leaves no successor plot");
  DropOutcome out;
  out.dropped = std::min(track.plots.size() - start - 1, budget);
  out.track.session_id = track.session_id;
  out.track.track_id = track.track_id;
  for (std::size_t j = 0; j < track.plots.size(); ++j) {
    if (j < start || j >= start + out.dropped) out.track.plots.push_back(track.plots[j]);
  }
  out.labeled = start;
  return out;
}

inline bool drop_eligible(std::size_t length, std::size_t c, std::size_t k) { return length >= k + c + 2; }

/// For every eligible track (|T| >= K + c + 2): start i ~ U[K, |T|-c-2],
/// budget r ~ U[c, |T|-1]; drops the span and labels the following plot 1.
inline LabeledTestSet drop_plots(const SessionStore& benign, std::size_t c, std::size_t k, std::uint64_t seed) {
  if (c < 1) throw Error(ErrorKind::invalid_config, "drop minimum c must be at least 1");
  std::mt19937_64 rng(seed);
  LabeledTestSet out;
  OrderedJson plan = OrderedJson::array();
  std::size_t eligible = 0;
  std::size_t ineligible = 0;
  for (const auto& [session, tracks] : benign.sessions) {
    for (const auto& track : tracks) {
      const std::size_t n = track.plots.size();
      if (!drop_eligible(n, c, k)) {
        ++ineligible;
        for (const auto& p : track.plots) out.plots.push_back({p, 0, kBenignAttack});
        continue;
      }
      ++eligible;
      std::uniform_int_distribution<std::size_t> start_dist(k, n - c - 2);
      std::uniform_int_distribution<std::size_t> budget_dist(c, n - 1);
      const std::size_t start = start_dist(rng);
      const std::size_t budget = budget_dist(rng);
      const auto result = apply_drop(track, start, budget);
      for (std::size_t j = 0; j < result.track.plots.size(); ++j) {
        const bool hit = j == result.labeled;
        out.plots.push_back({result.track.plots[j], hit ? 1 : 0, hit ? kDropAttack : kBenignAttack});
      }
      plan.push_back({{"session", session},
                      {"track_id", track.track_id},
                      {"length", n},
                      {"start", start},
                      {"budget", budget},
                      {"dropped", result.dropped}});
    }
  }
  out.provenance = {{"attack", kDropAttack},
                    {"c", c},
                    {"k", k},
                    {"seed", seed},
                    {"eligible_tracks", eligible},
                    {"ineligible_tracks", ineligible},
                    {"positives", out.positives()},
                    {"negatives", out.negatives()},
                    {"tracks", plan}};
  return out;
}

// ---------------------------------------------------------------------------
// Labelled NDJSON: plot fields plus "label" and "attack".

inline std::string serialize_labeled(const LabeledPlot& lp) {
  OrderedJson j = plot_to_json(lp.plot);
  j["label"] = lp.label;
  j["attack"] = lp.attack;
  return j.dump();
}

inline LabeledPlot parse_labeled_line(std::string_view line, const FeatureSchema& schema) {
  const Json j = detail::parse_json_line(line);
  LabeledPlot lp;
  lp.plot = detail::plot_from_object(j, schema);
  if (!j.contains("label") || !j.at("label").is_number_integer()) {
    throw Error(ErrorKind::schema_violation, "missing integer 'label'");
  }
  lp.label = j.at("label").get<int>();
  if (lp.label != 0 && lp.label != 1) throw Error(ErrorKind::schema_violation, "label must be 0 or 1");
  lp.attack = j.value("attack", kBenignAttack);
  return lp;
}

inline void write_labeled_set(const std::string& path, const LabeledTestSet& set) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path);
    for (const auto& lp : set.plots) out << serialize_labeled(lp) << '\n';
    if (!out) throw Error(ErrorKind::io, "write failed for " + path);
  }
  std::ofstream side(path + ".provenance.json", std::ios::binary);
  if (!side) throw Error(ErrorKind::io, "cannot write provenance for " + path);
  side << set.provenance.dump(2) << '\n';
}

inline LabeledTestSet read_labeled_set(const std::string& path, const FeatureSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  LabeledTestSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      set.plots.push_back(parse_labeled_line(line, schema));
    } catch (const Error& e) {
      throw Error(e.kind(), path + ":" + std::to_string(line_no) + ": " + e.message());
    }
  }
  std::ifstream side(path + ".provenance.json");
  if (side) {
    try {
      set.provenance = OrderedJson::parse(side);
    } catch (const OrderedJson::parse_error&) {
      set.provenance = OrderedJson::object();
    }
  }
  return set;
}

}  // namespace radarnomaly
