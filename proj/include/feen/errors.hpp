#pragma once

#include <stdexcept>
#include <string>

namespace feen {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidGeometry : Error {
  using Error::Error;
};

struct ParseError : Error {
  int line;
  // line_number 0 means the input has no useful line structure.
  explicit ParseError(const std::string& msg, int line_number = 0)
      : Error(line_number > 0 ? msg + " (line " + std::to_string(line_number) + ")" : msg),
        line(line_number) {}
};

struct UnsupportedElement : Error {
  using Error::Error;
};

struct NotInDomain : Error {
  using Error::Error;
};

struct DegenerateElement : Error {
  using Error::Error;
};

struct NotConverged : Error {
  long iterations;
  double residual;
  NotConverged(const std::string& msg, long iters, double res)
      : Error(msg + " after " + std::to_string(iters) +
              " iterations, residual " + std::to_string(res)),
        iterations(iters), residual(res) {}
};

struct InsufficientDofs : Error {
  using Error::Error;
};

struct ShapeMismatch : Error {
  using Error::Error;
};

struct MissingTime : Error {
  using Error::Error;
};

struct ZeroReference : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

struct NonFiniteLoss : Error {
  long iteration;
  NonFiniteLoss(const std::string& msg, long iter)
      : Error(msg + " at iteration " + std::to_string(iter)), iteration(iter) {}
};

struct HashMismatch : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace feen
