#pragma once

#include <stdexcept>
#include <string>

namespace sigmav {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition of a public operation (wrong length, bad index, bad parameter).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// The gradient norm dropped below the configured floor; the point is treated as critical.
class NearCriticalError : public Error {
 public:
  NearCriticalError(double grad_norm, double floor)
      : Error("near-critical point: |grad V| = " + std::to_string(grad_norm) +
              " below floor " + std::to_string(floor)),
        grad_norm_(grad_norm) {}
  double grad_norm() const noexcept { return grad_norm_; }

 private:
  double grad_norm_;
};

/// An iterative procedure failed to reach its target.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(int line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace sigmav
