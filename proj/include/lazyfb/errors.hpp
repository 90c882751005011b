#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lazyfb {

/// Non-finite values produced while integrating a vector field.
class NumericalFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A vector field was evaluated outside the set where it is defined.
class DomainViolation : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Closed loop reached a node on which the feedback is undefined.
class StabilizationGap : public std::runtime_error {
public:
  StabilizationGap(const std::string &what, std::size_t node)
      : std::runtime_error(what), node_(node) {}

  std::size_t node() const noexcept { return node_; }

private:
  std::size_t node_;
};

/// Caller broke a documented precondition (bad id, bad parameter range).
class ContractViolation : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

} // namespace lazyfb
