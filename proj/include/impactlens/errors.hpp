#pragma once

#include <stdexcept>
#include <string>

namespace impactlens {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad argument combinations, misaligned inputs, out-of-window dates.
class ValidationError : public Error {
public:
  using Error::Error;
};

// A record falls outside the requested date range.
class RangeViolationError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Invalid configuration values (iteration counts, seasonality, priors).
class ConfigError : public Error {
public:
  using Error::Error;
};

// Input file does not match the expected column schema.
class SchemaError : public Error {
public:
  using Error::Error;
};

// A measured covariate has gaps too wide to interpolate.
class GapError : public Error {
public:
  using Error::Error;
};

// Holiday calendar (or similar lookup) does not cover the requested range.
class CoverageError : public Error {
public:
  using Error::Error;
};

// Standardization requested on a constant segment; caller should skip it.
class DegenerateScaleError : public Error {
public:
  using Error::Error;
};

// Non-finite value produced mid-computation; message names the index.
class NumericalError : public Error {
public:
  using Error::Error;
};

// Model fitting failed (degenerate data, diverged chain).
class FitError : public Error {
public:
  using Error::Error;
};

// Too few posterior draws for stable quantiles.
class InsufficientSamplesError : public Error {
public:
  using Error::Error;
};

// Rank-deficient design matrix in the regression step.
class ConditioningError : public Error {
public:
  using Error::Error;
};

}  // namespace impactlens
