#ifndef CADLAB_ERRORS_HPP
#define CADLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cadlab {

// Bad user input: malformed spec/config, wrong dimensions, odd sample counts.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Not enough samples in some class to estimate a statistic.
class InsufficientDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Within-class scatter has a zero diagonal entry.
class SingularityError : public std::runtime_error {
 public:
  SingularityError(const std::string& what, std::size_t dimension)
      : std::runtime_error(what), dimension_(dimension) {}
  std::size_t dimension() const noexcept { return dimension_; }

 private:
  std::size_t dimension_;
};

// Argument outside the mathematical domain of an operation
// (lambda outside [0,1], zero-norm cosine inputs, degenerate lambda*).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Training produced a non-finite loss or parameter.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t epoch, double learning_rate)
      : std::runtime_error(what), epoch_(epoch), learning_rate_(learning_rate) {}
  std::size_t epoch() const noexcept { return epoch_; }
  double learning_rate() const noexcept { return learning_rate_; }

 private:
  std::size_t epoch_;
  double learning_rate_;
};

}  // namespace cadlab

#endif  // CADLAB_ERRORS_HPP
