#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace psuq {

// Process exit-code buckets. Library code throws typed errors; the CLI maps
// the bucket to its exit status and prints a structured message.
enum class ErrorCode {
  Internal = 1,
  Config = 2,
  Io = 3,
  Validation = 4,
  Solver = 5,
  Adapter = 7,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, std::string type, const std::string& msg)
      : std::runtime_error(msg), code_(code), type_(std::move(type)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& type() const noexcept { return type_; }

private:
  ErrorCode code_;
  std::string type_;
};

// Malformed input that failed before semantic checks (bad CSV row, bad JSON, ...).
struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error(ErrorCode::Validation, "ParseError", m) {}
};

// Well-formed input that violates a documented invariant (gap in hours, cf > 1, ...).
struct ValidationError : Error {
  explicit ValidationError(const std::string& m)
      : Error(ErrorCode::Validation, "ValidationError", m) {}
  ValidationError(std::string type, const std::string& m)
      : Error(ErrorCode::Validation, std::move(type), m) {}
};

// Not enough data to perform the operation (e.g. detrend with no complete year).
struct InsufficientDataError : ValidationError {
  explicit InsufficientDataError(const std::string& m)
      : ValidationError("InsufficientDataError", m) {}
};

// A resampling stratum has no candidate blocks in the source table.
struct EmptyStratumError : ValidationError {
  explicit EmptyStratumError(const std::string& m)
      : ValidationError("EmptyStratumError", m) {}
};

// Block/slice extraction outside the table's covered range.
struct OutOfRangeError : ValidationError {
  explicit OutOfRangeError(const std::string& m) : ValidationError("OutOfRangeError", m) {}
};

// Statistic undefined for the given inputs (e.g. variance of K < 2 samples).
struct DegenerateInputError : ValidationError {
  explicit DegenerateInputError(const std::string& m)
      : ValidationError("DegenerateInputError", m) {}
};

// Diagnostic grid too small to compare anything.
struct InsufficientGridError : ValidationError {
  explicit InsufficientGridError(const std::string& m)
      : ValidationError("InsufficientGridError", m) {}
};

// Inconsistent model description (unknown bus, missing fixed caps, ...).
struct SpecError : Error {
  explicit SpecError(const std::string& m) : Error(ErrorCode::Config, "SpecError", m) {}
};

// Bad run configuration or CLI usage.
struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error(ErrorCode::Config, "ConfigError", m) {}
};

struct IoError : Error {
  explicit IoError(const std::string& m) : Error(ErrorCode::Io, "IoError", m) {}
};

// Embedded solver failure (didn't converge, numerical trouble, iteration limit).
struct SolverError : Error {
  explicit SolverError(const std::string& m) : Error(ErrorCode::Solver, "SolverError", m) {}
  SolverError(std::string type, const std::string& m)
      : Error(ErrorCode::Solver, std::move(type), m) {}
};

struct NumericalError : SolverError {
  explicit NumericalError(const std::string& m) : SolverError("NumericalError", m) {}
};

// Too many per-sample solve failures during a bootstrap run.
struct TooManyFailuresError : SolverError {
  explicit TooManyFailuresError(const std::string& m)
      : SolverError("TooManyFailuresError", m) {}
};

// External solver adapter failure (missing binary, timeout, bad solution file).
struct AdapterError : Error {
  explicit AdapterError(const std::string& m) : Error(ErrorCode::Adapter, "AdapterError", m) {}
};

}  // namespace psuq
