#pragma once

#include <stdexcept>
#include <string>

namespace clpu {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Problems with input data, configuration, or requested parameters.
/// Mapped to exit code 2 by the CLI.
class DataError : public Error {
public:
  using Error::Error;
};

/// Order search could not produce a usable model. CLI exit code 3.
class SearchError : public Error {
public:
  using Error::Error;
};

/// A model could not produce an estimate. CLI exit code 4.
class EstimationError : public Error {
public:
  using Error::Error;
};

// series
class MalformedRow : public DataError {
public:
  using DataError::DataError;
};
class NonUniformSpacing : public DataError {
public:
  using DataError::DataError;
};
class EmptyFile : public DataError {
public:
  using DataError::DataError;
};
class InsufficientLength : public DataError {
public:
  using DataError::DataError;
};
class SeedLengthMismatch : public DataError {
public:
  using DataError::DataError;
};
class NoCompleteDay : public DataError {
public:
  using DataError::DataError;
};

// stattests
class ConstantSeries : public DataError {
public:
  using DataError::DataError;
};
class LagTooLarge : public DataError {
public:
  using DataError::DataError;
};
class TooShort : public DataError {
public:
  using DataError::DataError;
};

// arima
class SeriesTooShort : public DataError {
public:
  using DataError::DataError;
};
class OrderOutOfBounds : public DataError {
public:
  using DataError::DataError;
};
class InsufficientHistory : public EstimationError {
public:
  using EstimationError::EstimationError;
};
class LengthMismatch : public DataError {
public:
  using DataError::DataError;
};
class EmptyInput : public DataError {
public:
  using DataError::DataError;
};

// order_select
class NoConvergedCell : public SearchError {
public:
  using SearchError::SearchError;
};

// clpu
class StaleHistory : public EstimationError {
public:
  using EstimationError::EstimationError;
};
class ZeroPeak : public EstimationError {
public:
  using EstimationError::EstimationError;
};

// etpsim
class InvalidParams : public DataError {
public:
  using DataError::DataError;
};
class CoverageGap : public DataError {
public:
  using DataError::DataError;
};

// config
class ConfigError : public DataError {
public:
  using DataError::DataError;
};

}  // namespace clpu
