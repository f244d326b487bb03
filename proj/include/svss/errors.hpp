#ifndef SVSS_ERRORS_HPP
#define SVSS_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace svss {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent matrix / vector dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Parameters violating their positivity or shape invariants.
class InvalidParams : public Error {
 public:
  using Error::Error;
};

/// A spectral sample that cannot be used with the given parameters.
class InvalidSample : public Error {
 public:
  using Error::Error;
};

/// Spectral samples drawn at parameters other than the ones supplied.
class StaleSample : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// Total spectral-point budget smaller than the number of components.
class BudgetTooSmall : public Error {
 public:
  using Error::Error;
};

/// Cholesky failure that survived jitter escalation.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, std::vector<double> jitters)
      : Error(what), jitters_(std::move(jitters)) {}

  const std::vector<double>& attempted_jitters() const { return jitters_; }

 private:
  std::vector<double> jitters_;
};

/// Problem size above a dense-algebra cap.
class TooLarge : public Error {
 public:
  using Error::Error;
};

/// Malformed or missing input data (files, CSV cells, checkpoints).
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, long row, long column)
      : DataError(what), row_(row), column_(column) {}

  long row() const { return row_; }
  long column() const { return column_; }

 private:
  long row_;
  long column_;
};

class FileNotFound : public DataError {
 public:
  using DataError::DataError;
};

/// Invalid configuration or flag combination.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace svss

#endif  // SVSS_ERRORS_HPP
