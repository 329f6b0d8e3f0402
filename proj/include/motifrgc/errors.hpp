#pragma once

#include <stdexcept>
#include <string>

namespace motifrgc {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Geometry / kernel numerics.
class SingularAdditionError : public Error { using Error::Error; };
class BoundaryError : public Error { using Error::Error; };
class DegenerateMidpointError : public Error { using Error::Error; };
class InvalidTangentError : public Error { using Error::Error; };
class CoincidentPointError : public Error { using Error::Error; };

/// Raised when a forward or backward pass produces a non-finite value.
class NumericalFault : public Error { using Error::Error; };

// Data ingestion and sampling.
class DataError : public Error { using Error::Error; };

class ParseError : public DataError {
 public:
  ParseError(const std::string& file, long line, const std::string& what)
      : DataError(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}
  const std::string& file() const { return file_; }
  long line() const { return line_; }

 private:
  std::string file_;
  long line_;
};

class IndexError : public DataError { using DataError::DataError; };
class SplitError : public DataError { using DataError::DataError; };
class SamplingError : public DataError { using DataError::DataError; };

class MetricError : public Error { using Error::Error; };
class UndefinedSimilarityError : public Error { using Error::Error; };
class ContractError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class CheckpointError : public Error { using Error::Error; };

}  // namespace motifrgc
