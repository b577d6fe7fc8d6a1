#pragma once
#include <stdexcept>
#include <string>

namespace dlmc {

// A trajectory produced a non-finite entry. Carries the iteration at which
// the first bad value appeared; runs abort rather than clamp.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long long iteration, const std::string& what)
      : std::runtime_error(what), iteration_(iteration) {}
  long long iteration() const { return iteration_; }

 private:
  long long iteration_;
};

// A stated precondition of a bound does not hold (the bound is vacuous,
// not wrong). Distinguished from plain runtime errors so the CLI can map
// it to its own exit code.
class VacuousBoundError : public std::runtime_error {
 public:
  explicit VacuousBoundError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dlmc
