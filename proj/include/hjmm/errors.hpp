#pragma once

#include <stdexcept>
#include <string>

namespace hjmm {

// Base class for all library errors so callers can catch them in one clause.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// cumulant evaluation outside the model's moment interval
struct OutOfDomain : Error {
    using Error::Error;
};

// cumulant derivative order above the supported maximum (3)
struct UnsupportedOrder : Error {
    using Error::Error;
};

// operation not available for the model kind (e.g. path sampling of
// parametric pure-jump families)
struct UnsupportedOperation : Error {
    using Error::Error;
};

// the norm series or one of its integrals diverges: the curve is not a
// member of the requested space
struct Divergent : Error {
    using Error::Error;
};

// a rigorous truncation bound is not available for this term combination
struct TailBoundUnavailable : Error {
    using Error::Error;
};

// quadrature error estimate exceeds the requested tolerance
struct GridTooCoarse : Error {
    using Error::Error;
};

// shift offset is not an integer multiple of the grid spacing
struct NonAlignedShift : Error {
    using Error::Error;
};

// a proven inequality failed numerically: indicates a discretization or
// implementation bug, not a property of the inputs
struct ViolationDetected : Error {
    using Error::Error;
};

// the inputs do not satisfy the hypotheses of the inequality being checked
struct HypothesisViolated : Error {
    using Error::Error;
};

// a volatility curve's exposure -T(sigma) leaves the working interval
struct InadmissibleVolatility : Error {
    using Error::Error;
};

// dyadic refinement level beyond the configured cap
struct LevelTooDeep : Error {
    using Error::Error;
};

// bond maturity beyond the curve grid
struct MaturityBeyondGrid : Error {
    using Error::Error;
};

// too many Monte Carlo paths failed (admissibility loss) to report results
struct RunAborted : Error {
    using Error::Error;
};

// scenario file malformed, unknown key, or invalid parameter combination
struct ScenarioError : Error {
    using Error::Error;
};

} // namespace hjmm
