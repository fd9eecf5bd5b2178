#pragma once

#include <stdexcept>
#include <string>

namespace snnlab {

// Base for all library errors. Subtypes map onto CLI exit codes:
// ShapeError/ParameterError/FormatError -> 1, ConfigError -> 2.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor shapes do not compose (message carries both shapes).
struct ShapeError : Error {
  explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Out-of-domain argument (negative std, bad label, ...).
struct ParameterError : Error {
  explicit ParameterError(const std::string& msg) : Error(msg) {}
};

// Malformed file contents (IDX, checkpoint).
struct FormatError : Error {
  explicit FormatError(const std::string& msg) : Error(msg) {}
};

// Bad config file or CLI usage.
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// API misuse (stale tape, mismatched call sequence).
struct UsageError : Error {
  explicit UsageError(const std::string& msg) : Error(msg) {}
};

}  // namespace snnlab
