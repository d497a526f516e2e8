#pragma once

#include <stdexcept>
#include <string>

namespace mocrisk {

// Observation that cannot be mapped onto any monitoring cell.
class ClassificationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Matrix too ill-conditioned to invert (degenerate inspection grid or contrast).
class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// beta = 0 handed to an operation that only exists for beta > 0.
class InvalidTuningError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Power approximation requested at a point satisfying the null hypothesis.
class NullPointError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace mocrisk
