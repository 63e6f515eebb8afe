#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trailsim {

enum class ErrorCode {
  DisconnectedGraph,
  DuplicateSensorId,
  NoEntryExitSensor,
  EdgeDistanceMismatch,
  UnknownSensor,
  NonPositiveSpeed,
  EmptyGraph,
  InvalidMix,
  NoRoute,
  EmptyInput,
  UnknownOrigin,
  TooLarge,
  ZeroTruth,
  DivisionByZero,
  UnknownAttribute,
  ConfigInvalid,
  HorizonTooShort,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::DuplicateSensorId: return "DuplicateSensorId";
    case ErrorCode::NoEntryExitSensor: return "NoEntryExitSensor";
    case ErrorCode::EdgeDistanceMismatch: return "EdgeDistanceMismatch";
    case ErrorCode::UnknownSensor: return "UnknownSensor";
    case ErrorCode::NonPositiveSpeed: return "NonPositiveSpeed";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::InvalidMix: return "InvalidMix";
    case ErrorCode::NoRoute: return "NoRoute";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::UnknownOrigin: return "UnknownOrigin";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ZeroTruth: return "ZeroTruth";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::UnknownAttribute: return "UnknownAttribute";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::HorizonTooShort: return "HorizonTooShort";
  }
  return "Unknown";
}

/// Configuration faults map to CLI exit code 1, everything else to 2.
constexpr bool is_config_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::DisconnectedGraph:
    case ErrorCode::DuplicateSensorId:
    case ErrorCode::NoEntryExitSensor:
    case ErrorCode::EdgeDistanceMismatch:
    case ErrorCode::UnknownSensor:
    case ErrorCode::EmptyGraph:
    case ErrorCode::InvalidMix:
    case ErrorCode::NoRoute:
    case ErrorCode::UnknownAttribute:
    case ErrorCode::ConfigInvalid:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace trailsim
