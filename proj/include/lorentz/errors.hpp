#pragma once

#include <stdexcept>
#include <string>

namespace lorentz {

enum class ErrorKind {
  GrazingLaunch,
  FlightCapExceeded,
  SingularityStraddle,
  NonPrimitive,
  ExponentOutOfRange,
  ClosedCorridor,
  NoTangentIntersection,
  ChartViolation,
  InsufficientTrials,
  InvalidConfig,
  UnknownExperiment,
  UnsupportedKind,
  EmptyData,
  Io,
};

const char *to_string(ErrorKind kind);

/// Base of every error raised by the library. The kind is stable and is what
/// the CLI serializes into manifests.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class GrazingLaunch : public Error {
 public:
  explicit GrazingLaunch(const std::string &w) : Error(ErrorKind::GrazingLaunch, w) {}
};

class FlightCapExceeded : public Error {
 public:
  explicit FlightCapExceeded(const std::string &w) : Error(ErrorKind::FlightCapExceeded, w) {}
};

class SingularityStraddle : public Error {
 public:
  explicit SingularityStraddle(const std::string &w)
      : Error(ErrorKind::SingularityStraddle, w) {}
};

class NonPrimitive : public Error {
 public:
  explicit NonPrimitive(const std::string &w) : Error(ErrorKind::NonPrimitive, w) {}
};

class ExponentOutOfRange : public Error {
 public:
  explicit ExponentOutOfRange(const std::string &w) : Error(ErrorKind::ExponentOutOfRange, w) {}
};

class ClosedCorridor : public Error {
 public:
  explicit ClosedCorridor(const std::string &w) : Error(ErrorKind::ClosedCorridor, w) {}
};

class NoTangentIntersection : public Error {
 public:
  explicit NoTangentIntersection(const std::string &w)
      : Error(ErrorKind::NoTangentIntersection, w) {}
};

class ChartViolation : public Error {
 public:
  explicit ChartViolation(const std::string &w) : Error(ErrorKind::ChartViolation, w) {}
};

class InsufficientTrials : public Error {
 public:
  explicit InsufficientTrials(const std::string &w) : Error(ErrorKind::InsufficientTrials, w) {}
};

class InvalidConfig : public Error {
 public:
  InvalidConfig(const std::string &field, const std::string &w)
      : Error(ErrorKind::InvalidConfig, field + ": " + w), field_(field) {}
  const std::string &field() const noexcept { return field_; }

 private:
  std::string field_;
};

class UnknownExperiment : public Error {
 public:
  explicit UnknownExperiment(const std::string &w) : Error(ErrorKind::UnknownExperiment, w) {}
};

class UnsupportedKind : public Error {
 public:
  explicit UnsupportedKind(const std::string &w) : Error(ErrorKind::UnsupportedKind, w) {}
};

class EmptyData : public Error {
 public:
  explicit EmptyData(const std::string &w) : Error(ErrorKind::EmptyData, w) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string &w) : Error(ErrorKind::Io, w) {}
};

}  // namespace lorentz
