#pragma once

#include <stdexcept>

namespace ellsos {

// Series truncation target could not be met within the configured term
// ceiling (typically: argument reduction disabled and |Re lambda| large).
struct NonConvergent : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A dynamical denominator f(theta + k gamma) sits numerically on the zero
// lattice of f.  The parameter point is unusable, not merely inaccurate.
struct SingularDynamicalParameter : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A non-dynamical denominator vanished: coincident spectral parameters,
// vanishing exchange coefficient, and the like.
struct SingularCoefficient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No circle around the spectral parameters separates them from their
// quasi-period translates; quadrature would pick up the wrong poles.
struct ContourTooTight : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A multi-sum was asked for more terms than the configured ceiling allows.
struct TermBudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operand shapes disagree (state vector length vs. chain length, etc.).
struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Construction-time validation failure (domains, sizes, config schema).
struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace ellsos
