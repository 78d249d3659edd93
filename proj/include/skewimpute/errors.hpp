#pragma once

#include <stdexcept>
#include <string>

namespace skewimpute {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside its documented domain (non-finite input, p outside (0,1), ...).
struct InvalidInput : Error {
    using Error::Error;
};

// Too few complete cases for the requested fit.
struct InsufficientData : Error {
    using Error::Error;
};

// Rank-deficient design matrix (or a covariance that lost positive definiteness).
struct SingularDesign : Error {
    using Error::Error;
};

// Zero residual variance: drawing imputations from it would silently remove
// all randomness, so it is reported instead.
struct DegenerateFit : Error {
    using Error::Error;
};

// Moment-matching target that no parameter choice can reach.
struct InfeasibleTarget : Error {
    using Error::Error;
};

// Moment-matching target so close to the infeasible boundary that the
// recovered parameters are numerically meaningless.
struct NearSingular : Error {
    using Error::Error;
};

// Truncated sampling where the requested bound leaves no representable
// tail mass.
struct UnreachableBound : Error {
    using Error::Error;
};

// Data violating a model precondition (negative values under a root
// transform, responses below a truncation bound, ...).
struct InvalidData : Error {
    using Error::Error;
};

// Constant input where a shape statistic is undefined.
struct DegenerateSample : Error {
    using Error::Error;
};

// An imputation method failed for a whole replication (e.g. repeated
// non-convergence); the harness counts and skips these.
struct MethodFailure : Error {
    using Error::Error;
};

}  // namespace skewimpute
