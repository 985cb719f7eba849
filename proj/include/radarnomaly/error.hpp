#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace radarnomaly {

enum class ErrorKind {
  malformed_line,
  schema_violation,
  invalid_config,
  track_too_short,
  shape_mismatch,
  empty_sequence,
  index_out_of_range,
  insufficient_data,
  non_finite_loss,
  untrained_model,
  empty_validation,
  unknown_track,
  unknown_feature,
  cardinality_one,
  unknown_session,
  single_session,
  one_class_only,
  no_positives,
  io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::malformed_line: return "MalformedLine";
    case ErrorKind::schema_violation: return "SchemaViolation";
    case ErrorKind::invalid_config: return "InvalidConfig";
    case ErrorKind::track_too_short: return "TrackTooShort";
    case ErrorKind::shape_mismatch: return "ShapeMismatch";
    case ErrorKind::empty_sequence: return "EmptySequence";
    case ErrorKind::index_out_of_range: return "IndexOutOfRange";
    case ErrorKind::insufficient_data: return "InsufficientData";
    case ErrorKind::non_finite_loss: return "NonFiniteLoss";
    case ErrorKind::untrained_model: return "UntrainedModel";
    case ErrorKind::empty_validation: return "EmptyValidation";
    case ErrorKind::unknown_track: return "UnknownTrack";
    case ErrorKind::unknown_feature: return "UnknownFeature";
    case ErrorKind::cardinality_one: return "CardinalityOne";
    case ErrorKind::unknown_session: return "UnknownSession";
    case ErrorKind::single_session: return "SingleSession";
    case ErrorKind::one_class_only: return "OneClassOnly";
    case ErrorKind::no_positives: return "NoPositives";
    case ErrorKind::io: return "IoError";
  }
  return "Unknown";
}

/// Single exception type for the library; `kind()` carries the error category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

/// Process exit codes used by the command-line tool.
constexpr int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::malformed_line:
    case ErrorKind::schema_violation:
    case ErrorKind::invalid_config:
    case ErrorKind::unknown_feature:
    case ErrorKind::cardinality_one:
    case ErrorKind::unknown_session:
    case ErrorKind::single_session:
      return 2;
    case ErrorKind::insufficient_data:
    case ErrorKind::track_too_short:
    case ErrorKind::empty_validation:
      return 3;
    case ErrorKind::io:
      return 4;
    default:
      return 1;
  }
}

}  // namespace radarnomaly
