#pragma once

#include <stdexcept>
#include <string>

namespace lobeforge {

// Failure categories surfaced by the library. Each maps to one named error
// condition of the module contracts; CLI code turns them into exit messages.
enum class ErrorCode {
  ProjectionMiss,
  InvalidCurvature,
  QualityFailure,
  MissingTags,
  SelfIntersection,
  EmptyDatasheet,
  NonPhysical,
  DegenerateElement,
  DegenerateDesign,
  DegenerateHinge,
  ConstraintConflict,
  EigenIterationFailure,
  NoTransition,
  RangeError,
  FormatError,
  NonMonotoneStroke,
  SampleTooSmall,
  EmptyData,
  InvalidConfig,
  IoFailure,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ProjectionMiss: return "ProjectionMiss";
    case ErrorCode::InvalidCurvature: return "InvalidCurvature";
    case ErrorCode::QualityFailure: return "QualityFailure";
    case ErrorCode::MissingTags: return "MissingTags";
    case ErrorCode::SelfIntersection: return "SelfIntersection";
    case ErrorCode::EmptyDatasheet: return "EmptyDatasheet";
    case ErrorCode::NonPhysical: return "NonPhysical";
    case ErrorCode::DegenerateElement: return "DegenerateElement";
    case ErrorCode::DegenerateDesign: return "DegenerateDesign";
    case ErrorCode::DegenerateHinge: return "DegenerateHinge";
    case ErrorCode::ConstraintConflict: return "ConstraintConflict";
    case ErrorCode::EigenIterationFailure: return "EigenIterationFailure";
    case ErrorCode::NoTransition: return "NoTransition";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::NonMonotoneStroke: return "NonMonotoneStroke";
    case ErrorCode::SampleTooSmall: return "SampleTooSmall";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace lobeforge
