#pragma once

#include <stdexcept>
#include <string>

namespace perhom {

struct GridMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An iterative solver failed to reach its tolerance.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Internal consistency violation (e.g. Hermitian symmetry drift).
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace perhom
