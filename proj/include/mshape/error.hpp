#pragma once

#include <stdexcept>
#include <string>

namespace mshape {

/// Precondition on an argument does not hold.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A coefficient was evaluated outside the domain of its process.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The requested solver does not handle this process kind.
class UnsupportedProcess : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested closed form does not exist for this payoff.
class Unsupported : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Too few samples to support the requested estimate.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Name lookup against the catalog failed.
class UnknownName : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mshape
