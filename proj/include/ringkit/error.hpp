#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ringkit {

enum class ErrorCode {
  CrossingBoundaries,
  PithOutsideRing,
  DegenerateBoundary,
  DegeneratePolygon,
  NegativeArea,
  ZeroPerimeter,
  MissingPith,
  MissingScale,
  MissingEWBoundary,
  EWBoundaryOutOfBand,
  ZeroDimension,
  EmptyForeground,
  PithOutsideMask,
  LengthMismatch,
  DegenerateVariance,
  NoGroundTruth,
  MissingPair,
  ParseError,
  SchemaError,
  VersionError,
  EmptySeries,
  MissingImage,
  ConfigError,
  IoError,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CrossingBoundaries: return "CrossingBoundaries";
    case ErrorCode::PithOutsideRing: return "PithOutsideRing";
    case ErrorCode::DegenerateBoundary: return "DegenerateBoundary";
    case ErrorCode::DegeneratePolygon: return "DegeneratePolygon";
    case ErrorCode::NegativeArea: return "NegativeArea";
    case ErrorCode::ZeroPerimeter: return "ZeroPerimeter";
    case ErrorCode::MissingPith: return "MissingPith";
    case ErrorCode::MissingScale: return "MissingScale";
    case ErrorCode::MissingEWBoundary: return "MissingEWBoundary";
    case ErrorCode::EWBoundaryOutOfBand: return "EWBoundaryOutOfBand";
    case ErrorCode::ZeroDimension: return "ZeroDimension";
    case ErrorCode::EmptyForeground: return "EmptyForeground";
    case ErrorCode::PithOutsideMask: return "PithOutsideMask";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::NoGroundTruth: return "NoGroundTruth";
    case ErrorCode::MissingPair: return "MissingPair";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::VersionError: return "VersionError";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::MissingImage: return "MissingImage";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + (detail.empty() ? "" : ": " + detail)),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace ringkit
