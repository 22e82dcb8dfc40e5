#pragma once

#include <stdexcept>
#include <string>

namespace gnb {

// Error categories. Each maps onto one CLI exit code (see exit_code()).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

// A graph violates a structural precondition (e.g. disconnected input).
class StructuralError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

class MetricError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

// Training diverged (non-finite loss).
class NumericError : public Error {
 public:
  using Error::Error;
};

class SweepError : public Error {
 public:
  using Error::Error;
};

namespace exit_codes {
inline constexpr int kOk = 0;
inline constexpr int kGeneric = 1;
inline constexpr int kUsage = 2;
inline constexpr int kFormat = 3;
inline constexpr int kNumeric = 4;
inline constexpr int kIo = 5;
}  // namespace exit_codes

inline int exit_code(const std::exception& e) {
  if (dynamic_cast<const ParameterError*>(&e)) return exit_codes::kUsage;
  if (dynamic_cast<const FormatError*>(&e)) return exit_codes::kFormat;
  if (dynamic_cast<const NumericError*>(&e)) return exit_codes::kNumeric;
  if (dynamic_cast<const SweepError*>(&e)) return exit_codes::kNumeric;
  if (dynamic_cast<const IoError*>(&e)) return exit_codes::kIo;
  return exit_codes::kGeneric;
}

inline const char* category(const std::exception& e) {
  if (dynamic_cast<const ParameterError*>(&e)) return "parameter";
  if (dynamic_cast<const StructuralError*>(&e)) return "structure";
  if (dynamic_cast<const FormatError*>(&e)) return "format";
  if (dynamic_cast<const IoError*>(&e)) return "io";
  if (dynamic_cast<const ShapeError*>(&e)) return "shape";
  if (dynamic_cast<const StateError*>(&e)) return "state";
  if (dynamic_cast<const MetricError*>(&e)) return "metric";
  if (dynamic_cast<const SamplingError*>(&e)) return "sampling";
  if (dynamic_cast<const NumericError*>(&e)) return "numeric";
  if (dynamic_cast<const SweepError*>(&e)) return "sweep";
  return "internal";
}

}  // namespace gnb
