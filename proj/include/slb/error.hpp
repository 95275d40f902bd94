#pragma once

#include <stdexcept>
#include <string>

namespace slb {

// Invalid input or violated precondition (bad config, disconnected graph,
// alpha below its lower limit, ...). The CLI maps this to exit status 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical failure, e.g. the eigensolver hit its rotation cap.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// A state the implementation considers impossible was reached.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace slb
