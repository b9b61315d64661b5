#pragma once

#include <stdexcept>
#include <string>

namespace fedgala {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (vector lengths, layer layouts, matrix sizes).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A sampler or estimator was asked for zero items.
class EmptyRequestError : public Error {
 public:
  using Error::Error;
};

/// A quantity is infinite or undefined at the requested point (e.g. MI of
/// perfectly correlated features).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Caller violated a documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A contrastive loss received too few samples to form negatives.
class BatchTooSmallError : public Error {
 public:
  using Error::Error;
};

/// Probe split without both classes, after exhausting reshuffles.
class DegenerateSplitError : public Error {
 public:
  using Error::Error;
};

/// Training produced NaN/Inf.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedgala
