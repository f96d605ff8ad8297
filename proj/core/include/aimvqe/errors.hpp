#pragma once

#include <stdexcept>
#include <string>

namespace aimvqe {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Text of an operator listing violates the grammar. Carries the position of
// the offending character (1-based line/column and 0-based byte offset).
struct SyntaxError : Error {
  SyntaxError(std::string message, int line, int column, std::size_t offset)
      : Error("syntax error at line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + std::move(message)),
        line(line),
        column(column),
        offset(offset) {}
  int line;
  int column;
  std::size_t offset;
};

struct EmptyInput : Error {
  EmptyInput() : Error("operator text is empty or whitespace-only") {}
};

struct TooWide : Error {
  explicit TooWide(const std::string& what) : Error(what) {}
};

struct WidthMismatch : Error {
  explicit WidthMismatch(const std::string& what) : Error(what) {}
};

struct IndexOutOfRange : Error {
  explicit IndexOutOfRange(const std::string& what) : Error(what) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

struct SameSite : Error {
  explicit SameSite(const std::string& what) : Error(what) {}
};

struct SingularParameters : Error {
  explicit SingularParameters(const std::string& what) : Error(what) {}
};

struct UnboundParameter : Error {
  explicit UnboundParameter(const std::string& what) : Error(what) {}
};

struct InvalidChannel : Error {
  explicit InvalidChannel(const std::string& what) : Error(what) {}
};

struct InvalidT2 : Error {
  explicit InvalidT2(const std::string& what) : Error(what) {}
};

struct ProbabilityOutOfRange : Error {
  explicit ProbabilityOutOfRange(const std::string& what) : Error(what) {}
};

struct OddWidth : Error {
  explicit OddWidth(const std::string& what) : Error(what) {}
};

struct ElectronCountOutOfRange : Error {
  explicit ElectronCountOutOfRange(const std::string& what) : Error(what) {}
};

struct DisconnectedMap : Error {
  explicit DisconnectedMap(const std::string& what) : Error(what) {}
};

struct TooSmallMap : Error {
  explicit TooSmallMap(const std::string& what) : Error(what) {}
};

struct UnsupportedAnsatz : Error {
  explicit UnsupportedAnsatz(const std::string& what) : Error(what) {}
};

// Iterative eigensolver failed to reach the requested residual.
struct NoConvergence : Error {
  NoConvergence(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"),
        residual(residual) {}
  double residual;
};

struct InsufficientData : Error {
  explicit InsufficientData(const std::string& what) : Error(what) {}
};

struct NonPositiveValue : Error {
  explicit NonPositiveValue(const std::string& what) : Error(what) {}
};

struct ZeroReference : Error {
  ZeroReference() : Error("reference value is zero; percent deviation undefined") {}
};

// Experiment configuration is invalid. Carries the dotted path of the field.
struct ConfigError : Error {
  ConfigError(std::string field_path, const std::string& message)
      : Error("config error at '" + field_path + "': " + message),
        field(std::move(field_path)) {}
  std::string field;
};

// Internal numerical failure surfaced to the CLI as exit code 2.
struct NumericalFailure : Error {
  explicit NumericalFailure(const std::string& what) : Error(what) {}
};

}  // namespace aimvqe
