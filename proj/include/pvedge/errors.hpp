#pragma once

#include <stdexcept>
#include <string>

namespace pvedge {

// Error taxonomy mirrors the CLI exit-code contract:
//   2 usage/config, 3 data shape, 4 model corruption.
// Comparison-threshold failures (exit 1) are ordinary results, not errors.

/// Bad flags, unreadable config/schema/parameter files, invalid parameter values.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or mismatched input data (CSV parse failures, length mismatches).
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Feature-count or vector-length mismatch between model and data.
class DimensionError : public DataError {
public:
  using DataError::DataError;
};

/// R^2 requested against a zero-variance actual vector.
class UndefinedVarianceError : public DataError {
public:
  using DataError::DataError;
};

/// Anything wrong with a model: unreadable bytes or broken invariants.
class ModelError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad magic, unsupported version, truncated payload.
class ModelFormatError : public ModelError {
public:
  using ModelError::ModelError;
};

/// Structural invariant violations, including those discovered mid-descent.
class ModelCorruptionError : public ModelError {
public:
  using ModelError::ModelError;
};

}  // namespace pvedge
