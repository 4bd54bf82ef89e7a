#pragma once

#include <stdexcept>
#include <string>

namespace radcl {

// Error families map onto CLI exit codes: usage errors exit 1, data errors
// exit 2, numeric failures exit 3.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyReport : DataError {
  using DataError::DataError;
};

struct MalformedRule : DataError {
  using DataError::DataError;
};

struct LexiconError : DataError {
  using DataError::DataError;
};

struct InsufficientData : DataError {
  using DataError::DataError;
};

struct LabelDomainError : DataError {
  using DataError::DataError;
};

struct ChecksumMismatch : DataError {
  using DataError::DataError;
};

struct SchemaError : DataError {
  using DataError::DataError;
};

struct LengthMismatch : DataError {
  using DataError::DataError;
};

struct NonFiniteLoss : NumericError {
  using NumericError::NumericError;
};

struct BatchTooSmall : NumericError {
  using NumericError::NumericError;
};

struct ZeroVector : NumericError {
  using NumericError::NumericError;
};

}  // namespace radcl
