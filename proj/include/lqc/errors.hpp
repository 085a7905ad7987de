#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lqc {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: violated precondition, bad parameter combination, bad file.
class DomainError : public Error {
public:
  using Error::Error;
};

/// An iterative solver stopped before meeting its tolerance. Carries the
/// residuals it did reach so callers can report them.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string &what, std::vector<double> residuals)
      : Error(what), residuals_(std::move(residuals)) {}

  const std::vector<double> &residuals() const noexcept { return residuals_; }

private:
  std::vector<double> residuals_;
};

} // namespace lqc
