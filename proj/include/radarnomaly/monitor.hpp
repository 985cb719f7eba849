#pragma once

// Live monitor: runs both detectors over a plot stream and emits typed alerts.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "radarnomaly/model_file.hpp"

namespace radarnomaly {

enum class AlertKind { field_plot, field_track, timing };

inline std::string to_string(AlertKind k) {
  switch (k) {
    case AlertKind::field_plot: return "FIELD_PLOT";
    case AlertKind::field_track: return "FIELD_TRACK";
    case AlertKind::timing: return "TIMING";
  }
  return "?";
}

inline AlertKind alert_kind_from_string(const std::string& s) {
  if (s == "FIELD_PLOT") return AlertKind::field_plot;
  if (s == "FIELD_TRACK") return AlertKind::field_track;
  if (s == "TIMING") return AlertKind::timing;
  throw Error(ErrorKind::schema_violation, "unknown alert kind '" + s + "'");
}

struct AlertRecord {
  Timestamp timestamp = 0;
  std::string session_id;
  TrackId track_id = 0;
  std::size_t plot_index = 0;  // 0-based position of the plot within its track
  AlertKind kind = AlertKind::field_plot;
  double score = 0.0;
  double threshold = 0.0;

  bool operator==(const AlertRecord&) const = default;
};

inline OrderedJson to_json(const AlertRecord& a) {
  OrderedJson j;
  j["timestamp"] = a.timestamp;
  j["session"] = a.session_id;
  j["track_id"] = a.track_id;
  j["plot_index"] = a.plot_index;
  j["kind"] = to_string(a.kind);
  j["score"] = a.score;
  j["threshold"] = a.threshold;
  return j;
}

inline AlertRecord alert_from_json(const Json& j) {
  try {
    AlertRecord a;
    a.timestamp = j.at("timestamp").get<Timestamp>();
    a.session_id = j.at("session").get<std::string>();
    a.track_id = j.at("track_id").get<TrackId>();
    a.plot_index = j.at("plot_index").get<std::size_t>();
    a.kind = alert_kind_from_string(j.at("kind").get<std::string>());
    a.score = j.at("score").get<double>();
    a.threshold = j.at("threshold").get<double>();
    return a;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::schema_violation, std::string("bad alert record: ") + e.what());
  }
}

struct MonitorConfig {
  // Tracks silent for longer than this many time units are forgotten; 0 keeps
  // every track for the life of the monitor.
  Timestamp idle_horizon = 0;
};

struct MonitorStats {
  std::size_t plots = 0;
  std::size_t malformed = 0;
  std::size_t field_plot_alerts = 0;
  std::size_t field_track_alerts = 0;
  std::size_t timing_alerts = 0;
  std::size_t evicted = 0;

  std::size_t alerts() const { return field_plot_alerts + field_track_alerts + timing_alerts; }
};

inline OrderedJson to_json(const MonitorStats& s) {
  OrderedJson j;
  j["plots"] = s.plots;
  j["malformed"] = s.malformed;
  j["alerts"] = {{"FIELD_PLOT", s.field_plot_alerts},
                 {"FIELD_TRACK", s.field_track_alerts},
                 {"TIMING", s.timing_alerts}};
  j["evicted"] = s.evicted;
  return j;
}

class Monitor {
 public:
  explicit Monitor(const ModelBundle& bundle, MonitorConfig config = {})
      : bundle_(&bundle), config_(config) {
    if (bundle.field && !bundle.field->trained) throw Error(ErrorKind::untrained_model, "field model is not trained");
    if (bundle.timing && !bundle.timing->trained) throw Error(ErrorKind::untrained_model, "timing model is not trained");
    if (bundle.timing) timing_.emplace(*bundle.timing);
  }

  /// Scores one plot: field verdicts first, then the timing verdict once the
  /// track has K plots of history. Schema violations propagate.
  std::vector<AlertRecord> process(const PlotRecord& plot) {
    validate_plot(plot, bundle_->schema);
    const TrackKey key = TrackKey::of(plot);
    evict_idle(plot.update_time);

    auto& info = tracks_[key];
    const std::size_t index = info.seen++;
    info.last_time = plot.update_time;
    ++stats_.plots;

    std::vector<AlertRecord> out;
    auto emit = [&](AlertKind kind, double score, double threshold) {
      out.push_back({plot.update_time, plot.session_id, plot.track_id, index, kind, score, threshold});
    };
    if (bundle_->field) {
      const auto& field = *bundle_->field;
      const FieldVerdict v = detect(field, plot, collector_);
      if (v.plot_alert) {
        emit(AlertKind::field_plot, v.plot_score, field.plot_threshold);
        ++stats_.field_plot_alerts;
      }
      if (v.track_alert) {
        emit(AlertKind::field_track, v.track_average, field.track_threshold);
        ++stats_.field_track_alerts;
      }
    }
    if (timing_) {
      const auto v = timing_->observe(plot);
      if (v && v->alert) {
        emit(AlertKind::timing, v->squared_error, bundle_->timing->threshold);
        ++stats_.timing_alerts;
      }
    }
    return out;
  }

  /// Parses and scores one NDJSON line. A line that is not a JSON object is
  /// counted and rethrown as MalformedLine; schema violations propagate.
  std::vector<AlertRecord> process_line(std::string_view line) {
    PlotRecord plot;
    try {
      plot = parse_plot_line(line, bundle_->schema);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::malformed_line) ++stats_.malformed;
      throw;
    }
    return process(plot);
  }

  const MonitorStats& stats() const { return stats_; }
  std::size_t tracked() const { return tracks_.size(); }

 private:
  struct TrackInfo {
    std::size_t seen = 0;
    Timestamp last_time = 0;
  };

  void evict_idle(Timestamp now) {
    if (config_.idle_horizon <= 0 || now < next_sweep_) return;
    for (auto it = tracks_.begin(); it != tracks_.end();) {
      if (now - it->second.last_time > config_.idle_horizon) {
        collector_.erase(it->first);
        if (timing_) timing_->evict(it->first);
        it = tracks_.erase(it);
        ++stats_.evicted;
      } else {
        ++it;
      }
    }
    next_sweep_ = now + std::max<Timestamp>(1, config_.idle_horizon / 2);
  }

  const ModelBundle* bundle_;
  MonitorConfig config_;
  TrackScoreCollector collector_;
  std::optional<TimingStream> timing_;
  std::map<TrackKey, TrackInfo> tracks_;
  MonitorStats stats_;
  Timestamp next_sweep_ = 0;
};

using WarningFn = std::function<void(const std::string&)>;

/// Reads NDJSON plots from `in` and writes one alert per line to `out`,
/// flushing after each plot that raised alerts.
inline MonitorStats run_monitor(std::istream& in, std::ostream& out, const ModelBundle& bundle,
                                MonitorConfig config = {}, const WarningFn& warn = {}) {
  Monitor monitor(bundle, config);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<AlertRecord> alerts;
    try {
      alerts = monitor.process_line(line);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::malformed_line) {
        if (warn) warn("line " + std::to_string(line_no) + " skipped: " + e.message());
        continue;
      }
      throw Error(e.kind(), "line " + std::to_string(line_no) + ": " + e.message());
    }
    if (alerts.empty()) continue;
    for (const auto& a : alerts) out << to_json(a).dump() << '\n';
    out.flush();
  }
  return monitor.stats();
}

struct BenchReport {
  std::size_t plots = 0;
  std::size_t alerts = 0;
  double seconds = 0.0;
  double plots_per_second = 0.0;
  double mean_latency_us = 0.0;
  double p99_latency_us = 0.0;
};

inline OrderedJson to_json(const BenchReport& r) {
  OrderedJson j;
  j["plots"] = r.plots;
  j["alerts"] = r.alerts;
  j["seconds"] = r.seconds;
  j["plots_per_second"] = r.plots_per_second;
  j["mean_latency_us"] = r.mean_latency_us;
  j["p99_latency_us"] = r.p99_latency_us;
  return j;
}

/// Times the monitor over an in-memory stream, single-threaded.
inline BenchReport bench_monitor(const ModelBundle& bundle, std::span<const PlotRecord> plots, std::size_t repeats = 1) {
  using clock = std::chrono::steady_clock;
  BenchReport r;
  std::vector<double> latencies;
  latencies.reserve(plots.size() * repeats);
  const auto start = clock::now();
  for (std::size_t rep = 0; rep < repeats; ++rep) {
    Monitor monitor(bundle);
    for (const auto& p : plots) {
      const auto t0 = clock::now();
      r.alerts += monitor.process(p).size();
      latencies.push_back(std::chrono::duration<double, std::micro>(clock::now() - t0).count());
    }
  }
  r.seconds = std::chrono::duration<double>(clock::now() - start).count();
  r.plots = latencies.size();
  if (r.plots == 0) return r;
  r.plots_per_second = static_cast<double>(r.plots) / r.seconds;
  double sum = 0.0;
  for (double v : latencies) sum += v;
  r.mean_latency_us = sum / static_cast<double>(r.plots);
  r.p99_latency_us = nearest_rank_percentile(latencies, 0.99);
  return r;
}

}  // namespace radarnomaly
