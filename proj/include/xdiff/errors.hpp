#pragma once

#include <stdexcept>
#include <string>

namespace xdiff {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The entropy-variable transform (or a quantity derived from it) was
/// requested at a point of the simplex boundary where it is undefined.
struct BoundaryComposition : Error {
  using Error::Error;
};

/// A model constructor or configuration value violates its precondition.
struct InvalidParameter : Error {
  using Error::Error;
};

/// Rejection sampling against the requested boundary margin cannot succeed.
struct SamplerExhausted : Error {
  using Error::Error;
};

/// A reaction-dependent operation was invoked on a model without reactions.
struct MissingReaction : Error {
  using Error::Error;
};

/// A supplied reaction evaluator fails r_i(u) = 0 at u_i = 0.
struct InvalidReaction : Error {
  using Error::Error;
};

/// A checker needs the factored reduced mobility and the model lacks one.
struct MissingReducedMobility : Error {
  using Error::Error;
};

/// The improved-lemma check was invoked on a model that does not carry it.
struct WrongModel : Error {
  using Error::Error;
};

/// The fine twin configuration does not refine the coarse one.
struct ConfigMismatch : Error {
  using Error::Error;
};

/// Gronwall fitting is undefined because H(0) vanishes.
struct DegenerateSeries : Error {
  using Error::Error;
};

/// The reference field of a relative-entropy evaluation touches the boundary.
struct BoundaryReference : Error {
  using Error::Error;
};

/// Newton iteration failed to reach the residual tolerance.
struct NewtonDiverged : Error {
  int step_index;  // time step at which the solve failed (0-based)
  NewtonDiverged(const std::string& msg, int step) : Error(msg), step_index(step) {}
};

}  // namespace xdiff
