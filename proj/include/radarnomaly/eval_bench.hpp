#pragma once

// Evaluation protocols (cross-session, chronological, transfer), experiment
// runner and report writers.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "radarnomaly/attack_forge.hpp"
#include "radarnomaly/metrics.hpp"
#include "radarnomaly/model_file.hpp"

namespace radarnomaly {

enum class SetupKind { cross_session, chronological, transfer };

inline std::string to_string(SetupKind k) {
  switch (k) {
    case SetupKind::cross_session: return "cross";
    case SetupKind::chronological: return "chrono";
    case SetupKind::transfer: return "transfer";
  }
  return "cross";
}

inline SetupKind setup_kind_from_string(const std::string& s) {
  if (s == "cross" || s == "cross_session") return SetupKind::cross_session;
  if (s == "chrono" || s == "chronological") return SetupKind::chronological;
  if (s == "transfer") return SetupKind::transfer;
  throw Error(ErrorKind::invalid_config, "unknown setup '" + s + "'");
}

struct EvalSetup {
  SetupKind kind = SetupKind::cross_session;
  std::string examined;
  double fraction = 0.9;
};

struct PlotSplit {
  std::vector<PlotRecord> train;
  std::vector<PlotRecord> test;
};

namespace detail {

inline std::size_t fraction_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

}  // namespace detail

/// cross: train on every other session, test on the examined one.
/// chrono: first `fraction` of the examined session's plots (by time) train, rest test.
/// transfer: other sessions plus the first 1 - `fraction` of the examined one train.
inline PlotSplit make_split(const SessionStore& store, const EvalSetup& setup) {
  if (!store.sessions.contains(setup.examined)) {
    throw Error(ErrorKind::unknown_session, "no session '" + setup.examined + "'");
  }
  if (!(setup.fraction > 0.0 && setup.fraction < 1.0)) {
    throw Error(ErrorKind::invalid_config, "split fraction must lie in (0,1)");
  }
  if (setup.kind != SetupKind::chronological && store.sessions.size() < 2) {
    throw Error(ErrorKind::single_session, "setup '" + to_string(setup.kind) + "' needs at least two sessions");
  }
  PlotSplit split;
  SessionStore others;
  SessionStore examined;
  for (const auto& [id, tracks] : store.sessions) (id == setup.examined ? examined : others).sessions[id] = tracks;
  const auto examined_plots = flatten_chronological(examined);

  switch (setup.kind) {
    case SetupKind::cross_session:
      split.train = flatten_chronological(others);
      split.test = examined_plots;
      break;
    case SetupKind::chronological: {
      const std::size_t cut = detail::fraction_count(setup.fraction, examined_plots.size());
      split.train.assign(examined_plots.begin(), examined_plots.begin() + static_cast<std::ptrdiff_t>(cut));
      split.test.assign(examined_plots.begin() + static_cast<std::ptrdiff_t>(cut), examined_plots.end());
      break;
    }
    case SetupKind::transfer: {
      const std::size_t cut = detail::fraction_count(1.0 - setup.fraction, examined_plots.size());
      split.train = flatten_chronological(others);
      split.train.insert(split.train.end(), examined_plots.begin(), examined_plots.begin() + static_cast<std::ptrdiff_t>(cut));
      split.test.assign(examined_plots.begin() + static_cast<std::ptrdiff_t>(cut), examined_plots.end());
      break;
    }
  }
  return split;
}

/// Tracks made only of training plots; tracks that straddle into the test
/// side are left out.
inline std::vector<Track> training_tracks(const PlotSplit& split) {
  std::set<TrackKey> straddling;
  for (const auto& p : split.test) straddling.insert(TrackKey::of(p));
  std::vector<Track> out;
  for (auto& t : assemble_tracks(split.train).all_tracks()) {
    if (!straddling.contains(TrackKey::of(t))) out.push_back(std::move(t));
  }
  return out;
}

struct AttackSpec {
  enum class Kind { manipulate, drop } kind = Kind::drop;
  std::string feature;
  std::size_t c = 10;
  std::size_t k = 5;

  std::string name() const { return kind == Kind::drop ? kDropAttack : manipulation_attack(feature); }

  static AttackSpec parse(const std::string& text, std::size_t c = 10, std::size_t k = 5) {
    AttackSpec a;
    a.c = c;
    a.k = k;
    if (text == kDropAttack) return a;
    const std::string prefix = "manipulate:";
    if (text.rfind(prefix, 0) == 0 && text.size() > prefix.size()) {
      a.kind = Kind::manipulate;
      a.feature = text.substr(prefix.size());
      return a;
    }
    throw Error(ErrorKind::invalid_config, "attack must be 'drop' or 'manipulate:<feature>', got '" + text + "'");
  }
};

/// Seed for a named sub-task, derived from the master seed by FNV-1a.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (unsigned char ch : tag) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct LevelResult {
  CurveReport curve;
  RateSummary rates;
  double threshold = 0.0;
};

struct ExperimentResult {
  EvalSetup setup;
  AttackSpec attack;
  std::uint64_t seed = 0;
  std::string level;  // "track" for manipulation, "plot" for dropping
  LevelResult primary;
  std::optional<LevelResult> plot_level;  // manipulation only
  std::size_t test_plots = 0;
  std::size_t test_tracks = 0;
  std::size_t positive_plots = 0;
  std::size_t negative_plots = 0;
  OrderedJson attack_summary;
  std::string skipped;  // reason, when the split could not train the detector
};

namespace detail {

/// Labelled plots grouped per track, time-ordered with ties in input order.
inline std::map<TrackKey, std::vector<LabeledPlot>> group_labeled(const LabeledTestSet& set) {
  std::map<TrackKey, std::vector<LabeledPlot>> groups;
  for (const auto& lp : set.plots) groups[TrackKey::of(lp.plot)].push_back(lp);
  for (auto& [key, g] : groups) {
    std::stable_sort(g.begin(), g.end(), [](const LabeledPlot& a, const LabeledPlot& b) {
      return a.plot.update_time < b.plot.update_time;
    });
  }
  return groups;
}

inline LevelResult level_result(const std::vector<LabeledScore>& scores, double threshold) {
  return {build_curve(scores), rate_at_threshold(scores, threshold), threshold};
}

inline OrderedJson summarize_provenance(const OrderedJson& p) {
  OrderedJson out = OrderedJson::object();
  for (const auto& [key, value] : p.items()) {
    if (key != "tracks") out[key] = value;
  }
  return out;
}

}  // namespace detail

/// Scores a manipulation test set: plot scores, and per-track mean scores
/// against the calibrated track threshold (primary level).
inline ExperimentResult evaluate_manipulation(const FieldModel& model, const LabeledTestSet& set) {
  ExperimentResult r;
  r.level = "track";
  std::vector<LabeledScore> plot_scores;
  std::vector<LabeledScore> track_scores;
  for (const auto& [key, plots] : detail::group_labeled(set)) {
    double sum = 0.0;
    int label = 0;
    for (const auto& lp : plots) {
      const double s = score_plot(model, lp.plot);
      plot_scores.push_back({s, lp.label});
      sum += s;
      label = std::max(label, lp.label);
    }
    track_scores.push_back({sum / static_cast<double>(plots.size()), label});
  }
  r.primary = detail::level_result(track_scores, model.track_threshold);
  r.plot_level = detail::level_result(plot_scores, model.plot_threshold);
  r.test_tracks = track_scores.size();
  return r;
}

/// Scores a drop test set: every plot with at least K predecessors in its
/// track gets its window's squared prediction error.
inline ExperimentResult evaluate_drop(const TimingModel& model, const LabeledTestSet& set) {
  ExperimentResult r;
  r.level = "plot";
  std::vector<LabeledScore> scores;
  const std::size_t k = model.config.window;
  for (const auto& [key, plots] : detail::group_labeled(set)) {
    Track track;
    track.session_id = key.session_id;
    track.track_id = key.track_id;
    for (const auto& lp : plots) track.plots.push_back(lp.plot);
    const auto errors = track_window_errors(model, track);
    for (std::size_t j = 0; j < errors.size(); ++j) scores.push_back({errors[j], plots[j + k].label});
    ++r.test_tracks;
  }
  r.primary = detail::level_result(scores, model.threshold);
  return r;
}

inline LabeledTestSet forge_attack(const SessionStore& benign, const FeatureSchema& schema, const AttackSpec& attack,
                                   std::uint64_t seed) {
  if (attack.kind == AttackSpec::Kind::drop) return drop_plots(benign, attack.c, attack.k, seed);
  return manipulate_categorical(benign, schema, attack.feature, seed);
}

/// Scores a labelled set with the detector its attack targets.
inline ExperimentResult evaluate_set(const ModelBundle& bundle, const LabeledTestSet& set, const AttackSpec& attack) {
  ExperimentResult r;
  if (attack.kind == AttackSpec::Kind::drop) {
    if (!bundle.timing) throw Error(ErrorKind::untrained_model, "drop evaluation needs a timing model");
    r = evaluate_drop(*bundle.timing, set);
  } else {
    if (!bundle.field) throw Error(ErrorKind::untrained_model, "manipulation evaluation needs a field model");
    r = evaluate_manipulation(*bundle.field, set);
  }
  r.attack = attack;
  r.test_plots = set.plots.size();
  r.positive_plots = set.positives();
  r.negative_plots = set.negatives();
  r.attack_summary = detail::summarize_provenance(set.provenance);
  return r;
}

inline ExperimentResult evaluate_attack(const ModelBundle& bundle, const SessionStore& test_store,
                                        const AttackSpec& attack, std::uint64_t attack_seed) {
  ExperimentResult r = evaluate_set(bundle, forge_attack(test_store, bundle.schema, attack, attack_seed), attack);
  r.seed = attack_seed;
  return r;
}

/// Scores a test set read from disk; the attack is taken from its provenance,
/// or from the plot labels when the sidecar is missing.
inline ExperimentResult evaluate_testset(const ModelBundle& bundle, const LabeledTestSet& set) {
  const OrderedJson& prov = set.provenance;
  std::string name;
  if (prov.is_object() && prov.contains("attack")) name = prov.at("attack").get<std::string>();
  for (const auto& lp : set.plots) {
    if (!name.empty()) break;
    if (lp.attack != kBenignAttack) name = lp.attack;
  }
  if (name.empty()) throw Error(ErrorKind::no_positives, "test set carries no attack");
  std::size_t c = 10;
  std::size_t k = bundle.timing ? bundle.timing->config.window : 5;
  if (prov.is_object()) {
    c = prov.value("c", c);
    k = prov.value("k", k);
  }
  ExperimentResult r = evaluate_set(bundle, set, AttackSpec::parse(name, c, k));
  if (prov.is_object()) r.seed = prov.value("seed", std::uint64_t{0});
  return r;
}

struct BatteryConfig {
  std::vector<SetupKind> setups{SetupKind::cross_session};
  std::vector<AttackSpec> attacks;
  std::vector<std::string> sessions;  // empty: every session of the corpus
  PipelineTrainConfig training;
  double fraction = 0.9;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Trains the detectors each setup needs once per examined session, then runs
/// every attack against that session's test split.
inline std::vector<ExperimentResult> run_battery(const SessionStore& corpus, const FeatureSchema& schema,
                                                 const BatteryConfig& config, std::uint64_t seed,
                                                 const ProgressFn& progress = {}) {
  std::vector<std::string> sessions = config.sessions;
  if (sessions.empty()) {
    for (const auto& [id, tracks] : corpus.sessions) sessions.push_back(id);
  }
  bool need_field = false;
  bool need_timing = false;
  for (const auto& a : config.attacks) (a.kind == AttackSpec::Kind::drop ? need_timing : need_field) = true;

  std::vector<ExperimentResult> results;
  for (SetupKind kind : config.setups) {
    for (const auto& session : sessions) {
      const EvalSetup setup{kind, session, config.fraction};
      const PlotSplit split = make_split(corpus, setup);
      const auto tracks = training_tracks(split);
      const SessionStore test_store = assemble_tracks(split.test);
      PipelineTrainConfig tc = config.training;
      tc.with_field = need_field;
      tc.with_timing = need_timing;
      for (const auto& a : config.attacks) {
        if (a.kind == AttackSpec::Kind::drop) tc.timing.window = a.k;
      }
      const std::string tag = to_string(kind) + "/" + session;
      if (progress) progress("training " + tag + " on " + std::to_string(tracks.size()) + " tracks");
      ModelBundle bundle;
      try {
        bundle = train_pipeline(tracks, schema, tc, derive_seed(seed, "model/" + tag));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::insufficient_data) throw;
        for (const auto& attack : config.attacks) {
          ExperimentResult r;
          r.setup = setup;
          r.attack = attack;
          r.level = attack.kind == AttackSpec::Kind::drop ? "plot" : "track";
          r.skipped = e.what();
          results.push_back(std::move(r));
        }
        if (progress) progress(tag + " skipped: " + e.what());
        continue;
      }
      for (const auto& attack : config.attacks) {
        ExperimentResult r = evaluate_attack(bundle, test_store, attack, derive_seed(seed, "attack/" + tag + "/" + attack.name()));
        r.setup = setup;
        results.push_back(std::move(r));
        if (progress) {
          const auto& p = results.back().primary;
          char line[256];
          std::snprintf(line, sizeof line, "%s %s: auc=%.4f ap=%.4f tpr=%.4f fpr=%.4f", tag.c_str(),
                        attack.name().c_str(), p.curve.auc, p.curve.ap, p.rates.tpr, p.rates.fpr);
          progress(line);
        }
      }
    }
  }
  return results;
}

// ---------------------------------------------------------------------------
// Aggregation and reports

struct BatterySummaryRow {
  std::string setup;
  std::string attack;
  std::size_t experiments = 0;  // experiments with both classes present
  double auc = 0.0;
  double ap = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

/// Per (setup, attack) means over experiments whose curves are defined.
inline std::vector<BatterySummaryRow> summarize(const std::vector<ExperimentResult>& results) {
  std::map<std::pair<std::string, std::string>, BatterySummaryRow> rows;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& r : results) {
    const auto key = std::make_pair(to_string(r.setup.kind), r.attack.name());
    if (!rows.contains(key)) {
      order.push_back(key);
      rows[key] = BatterySummaryRow{key.first, key.second};
    }
    if (!r.primary.curve.defined) continue;
    auto& row = rows[key];
    ++row.experiments;
    row.auc += r.primary.curve.auc;
    row.ap += r.primary.curve.ap;
    row.tpr += r.primary.rates.tpr;
    row.fpr += r.primary.rates.fpr;
  }
  std::vector<BatterySummaryRow> out;
  for (const auto& key : order) {
    auto row = rows[key];
    if (row.experiments > 0) {
      const double n = static_cast<double>(row.experiments);
      row.auc /= n;
      row.ap /= n;
      row.tpr /= n;
      row.fpr /= n;
    }
    out.push_back(row);
  }
  return out;
}

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline OrderedJson to_json(const RateSummary& r) {
  OrderedJson j;
  j["tpr"] = r.tpr;
  j["fpr"] = r.fpr;
  j["precision"] = r.precision;
  j["tp"] = r.tp;
  j["fp"] = r.fp;
  j["tn"] = r.tn;
  j["fn"] = r.fn;
  j["flags"] = {{"no_positives", r.no_positives},
                {"no_negatives", r.no_negatives},
                {"no_predicted_positives", r.no_predicted_positives}};
  return j;
}

inline OrderedJson to_json(const LevelResult& l) {
  OrderedJson j;
  j["auc"] = l.curve.auc;
  j["ap"] = l.curve.ap;
  j["defined"] = l.curve.defined;
  j["positives"] = l.curve.positives;
  j["negatives"] = l.curve.negatives;
  j["threshold"] = l.threshold;
  j["at_threshold"] = to_json(l.rates);
  return j;
}

inline OrderedJson to_json(const ExperimentResult& r) {
  OrderedJson j;
  if (!r.setup.examined.empty()) {
    j["setup"] = to_string(r.setup.kind);
    j["examined_session"] = r.setup.examined;
    j["fraction"] = r.setup.fraction;
  }
  j["attack"] = r.attack.name();
  if (r.attack.kind == AttackSpec::Kind::drop) {
    j["c"] = r.attack.c;
    j["k"] = r.attack.k;
  }
  j["level"] = r.level;
  if (!r.skipped.empty()) {
    j["skipped"] = r.skipped;
    return j;
  }
  j["attack_seed"] = r.seed;
  j["test_plots"] = r.test_plots;
  j["test_tracks"] = r.test_tracks;
  j["positive_plots"] = r.positive_plots;
  j["negative_plots"] = r.negative_plots;
  j["balanced"] = r.positive_plots == r.negative_plots;
  j["metrics"] = to_json(r.primary);
  if (r.plot_level) j["plot_level"] = to_json(*r.plot_level);
  j["attack_summary"] = r.attack_summary;
  return j;
}

inline std::string experiment_name(const ExperimentResult& r) {
  std::string attack = r.attack.name();
  std::replace(attack.begin(), attack.end(), ':', '-');
  return to_string(r.setup.kind) + "_" + r.setup.examined + "_" + attack;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

inline std::string roc_csv(const CurveReport& c) {
  std::string s = "threshold,fpr,tpr\n";
  for (const auto& p : c.points) s += format_real(p.threshold) + "," + format_real(p.fpr) + "," + format_real(p.tpr) + "\n";
  return s;
}

inline std::string prc_csv(const CurveReport& c) {
  std::string s = "threshold,recall,precision\n";
  for (const auto& p : c.points) {
    s += format_real(p.threshold) + "," + format_real(p.recall) + "," + format_real(p.precision) + "\n";
  }
  return s;
}

inline std::string summary_csv(const std::vector<BatterySummaryRow>& rows) {
  std::string s = "setup,attack,experiments,avg_auc,avg_ap,avg_tpr,avg_fpr\n";
  for (const auto& r : rows) {
    s += r.setup + "," + r.attack + "," + std::to_string(r.experiments) + "," + format_real(r.auc) + "," +
         format_real(r.ap) + "," + format_real(r.tpr) + "," + format_real(r.fpr) + "\n";
  }
  return s;
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
}

/// Writes report.json, roc.csv and prc.csv for one experiment into `dir`.
inline void write_experiment(const std::filesystem::path& dir, const ExperimentResult& r, const OrderedJson& config_echo) {
  ensure_directory(dir);
  OrderedJson report = to_json(r);
  report["config"] = config_echo;
  write_text(dir / "report.json", report.dump(2) + "\n");
  write_text(dir / "roc.csv", roc_csv(r.primary.curve));
  write_text(dir / "prc.csv", prc_csv(r.primary.curve));
}

/// Writes <dir>/<experiment>/{report.json,roc.csv,prc.csv} per result plus
/// <dir>/summary.csv and <dir>/battery.json.
inline void write_reports(const std::filesystem::path& dir, const std::vector<ExperimentResult>& results,
                          const OrderedJson& config_echo) {
  ensure_directory(dir);
  OrderedJson battery;
  battery["config"] = config_echo;
  battery["experiments"] = OrderedJson::array();
  for (const auto& r : results) {
    write_experiment(dir / experiment_name(r), r, config_echo);
    battery["experiments"].push_back(to_json(r));
  }
  const auto rows = summarize(results);
  write_text(dir / "summary.csv", summary_csv(rows));
  write_text(dir / "battery.json", battery.dump(2) + "\n");
}

}  // namespace radarnomaly
