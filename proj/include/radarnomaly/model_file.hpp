#pragma once

// Versioned JSON model file holding both detectors and their thresholds.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "radarnomaly/field_detector.hpp"
#include "radarnomaly/timing_detector.hpp"

namespace radarnomaly {

inline constexpr std::string_view kModelFormat = "radarnomaly-model";
inline constexpr int kModelVersion = 1;

struct ModelBundle {
  FeatureSchema schema;
  std::optional<FieldModel> field;
  std::optional<TimingModel> timing;
};

inline OrderedJson to_json(const ModelBundle& bundle) {
  OrderedJson j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["schema_fingerprint"] = schema_fingerprint(bundle.schema);
  j["schema"] = schema_to_json(bundle.schema);
  OrderedJson thresholds = OrderedJson::object();
  if (bundle.field) {
    thresholds["field_plot"] = bundle.field->plot_threshold;
    thresholds["field_track"] = bundle.field->track_threshold;
  }
  if (bundle.timing) thresholds["timing"] = bundle.timing->threshold;
  j["thresholds"] = thresholds;
  if (bundle.field) j["field"] = to_json(*bundle.field);
  if (bundle.timing) j["timing"] = to_json(*bundle.timing);
  return j;
}

inline std::string serialize_model(const ModelBundle& bundle) { return to_json(bundle).dump(1) + "\n"; }

/// Parses a model document. When `expected` is given, a model trained for a
/// different schema is refused.
inline ModelBundle parse_model(const std::string& text, const FeatureSchema* expected = nullptr) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::schema_violation, std::string("model file is not JSON: ") + e.what());
  }
  ModelBundle bundle;
  try {
    if (j.at("format").get<std::string>() != kModelFormat) throw Error(ErrorKind::schema_violation, "not a model file");
    if (j.at("version").get<int>() != kModelVersion) {
      throw Error(ErrorKind::schema_violation, "unsupported model version " + std::to_string(j.at("version").get<int>()));
    }
    bundle.schema = schema_from_json(j.at("schema"));
    const auto fingerprint = j.at("schema_fingerprint").get<std::string>();
    if (fingerprint != schema_fingerprint(bundle.schema)) {
      throw Error(ErrorKind::schema_violation, "schema fingerprint does not match embedded schema");
    }
    if (expected && schema_fingerprint(*expected) != fingerprint) {
      throw Error(ErrorKind::schema_violation, "model was trained for a different schema (fingerprint " + fingerprint + ")");
    }
    if (j.contains("field")) bundle.field = field_model_from_json(j.at("field"), bundle.schema);
    if (j.contains("timing")) bundle.timing = timing_model_from_json(j.at("timing"), bundle.schema);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::schema_violation, std::string("malformed model file: ") + e.what());
  }
  return bundle;
}

inline void save_model(const std::string& path, const ModelBundle& bundle) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write model " + path);
  out << serialize_model(bundle);
  if (!out) throw Error(ErrorKind::io, "write failed for " + path);
}

inline ModelBundle load_model(const std::string& path, const FeatureSchema* expected = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open model " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_model(buffer.str(), expected);
}

struct PipelineTrainConfig {
  TrainConfig train;
  TimingConfig timing;
  bool with_field = true;
  bool with_timing = true;
};

/// Trains both detectors on the same benign tracks. The timing detector uses
/// the next seed so the two splits are independent draws.
inline ModelBundle train_pipeline(std::span<const Track> tracks, const FeatureSchema& schema,
                                  const PipelineTrainConfig& config, std::uint64_t seed) {
  ModelBundle bundle;
  bundle.schema = schema;
  if (config.with_field) bundle.field = train_field_model(tracks, schema, config.train, seed);
  if (config.with_timing) bundle.timing = train_timing_model(tracks, schema, config.timing, config.train, seed + 1);
  return bundle;
}

}  // namespace radarnomaly
