#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace climctl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameter or state outside its physical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Non-finite or non-physical values produced while stepping a model.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

}  // namespace climctl
