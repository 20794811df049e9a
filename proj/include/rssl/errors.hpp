#pragma once

#include <stdexcept>
#include <string>

// Error taxonomy for the radial self-similar scattering lab.  Every throwing
// path in the library uses one of these types so callers (and the CLI) can
// translate failures into actionable messages.
namespace rssl {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Grid construction rejected: interior point count is not a power of two.
struct NonPowerOfTwo : Error {
  using Error::Error;
};

// Grid construction rejected: ambient dimension below 3.
struct DimensionTooLow : Error {
  using Error::Error;
};

// Two fields on incompatible grids were combined.
struct GridMismatch : Error {
  using Error::Error;
};

// A rescaling would push non-negligible amplitude past the outer boundary.
struct ContentOverflow : Error {
  using Error::Error;
};

// Scaling-profile admissibility check failed; message names the clause.
struct FailsConditions : Error {
  using Error::Error;
};

// Ground-state solve found no negative eigenvalue.
struct NoBoundState : Error {
  using Error::Error;
};

// Nonlinear ground-state solve found no negative-energy profile.
struct NoSoliton : Error {
  using Error::Error;
};

// An iterative solve exhausted its budget without meeting its tolerance.
struct SolveDiverged : Error {
  using Error::Error;
};

// The automatic start-time ladder ran past its cap.
struct LadderExhausted : Error {
  using Error::Error;
};

// Scenario configuration is malformed or violates a parameter window.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace rssl
