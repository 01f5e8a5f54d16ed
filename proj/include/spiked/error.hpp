#pragma once

#include <stdexcept>
#include <string>

namespace spiked {

// Invalid argument or an input outside the mathematical domain of an
// operation. The CLI maps these to exit status 1.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Prior mean is not zero; threshold computations refuse such priors.
class CenteringError : public DomainError {
 public:
  CenteringError(const std::string& what, double mean) : DomainError(what), mean_(mean) {}
  double mean() const noexcept { return mean_; }

 private:
  double mean_;
};

// Threshold search could not establish a sign change.
class BracketError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Work or memory would exceed a configured limit. Exit status 2.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spiked
