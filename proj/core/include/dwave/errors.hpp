#pragma once

#include <stdexcept>
#include <string>

namespace dwave {

/// Malformed or out-of-range user input (sizes, non-finite values, bad keys).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Model parameters outside their admissibility window.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operator assembly failed (e.g. empty control boundary).
class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Factorization failure, NaN blow-up, singular pencil.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dwave
