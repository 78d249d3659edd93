#pragma once

#include <functional>
#include <vector>

#include "skewimpute/dataset.hpp"
#include "skewimpute/rng.hpp"

namespace skewimpute {

// All methods share the same stream discipline: parameter-level draws
// (posterior scale and coefficients) consume the passed stream directly,
// while the noise for missing row i comes from rng.fork(1000 + i). Because
// substreams are keyed rather than positional, methods that share their
// parameter step (linear and its censored/truncated variants) produce
// identical first draws per entry, and a truncation redraw disturbs nothing
// but its own entry.

// Impute a single variable as normal with posterior-drawn mean/variance.
// Observed entries are returned bit-identical.
std::vector<double> impute_fn_univariate(const std::vector<double>& values,
                                         const std::vector<std::uint8_t>& missing,
                                         int prior_df, RandomStream& rng);

// Regression imputation of x on (1, y[, z]) with posterior-drawn parameters
// and normal residual noise.
std::vector<double> impute_linear(const IncompleteDataset& ds, RandomStream& rng);

// Round values below c up to c. Idempotent.
std::vector<double> apply_censoring(std::vector<double> values, double c);

// Redraw until the value clears c, up to `cap` attempts; then engage the
// relaxed bound fallback_c for up to `cap` more, counting the event. The
// redraw closure owns its stream.
double apply_truncation_rejection(const std::function<double()>& redraw, double c, int cap,
                                  double fallback_c, ImputeDiag* diag);

// impute_linear with predictors (y, y^2) — plus z in the trivariate design.
std::vector<double> impute_quadratic(const IncompleteDataset& ds, RandomStream& rng);

// Fourth-root the response before the regression, impute on that scale, and
// raise imputed values to the 4th power (negative draws become positive
// under the even power). Observed x must be nonnegative (InvalidData).
std::vector<double> impute_transform_x(const IncompleteDataset& ds, RandomStream& rng);

// As impute_transform_x, with every predictor v replaced by
// (v - min(v))^(1/4) using the per-dataset minimum.
std::vector<double> impute_transform_all(const IncompleteDataset& ds, RandomStream& rng);

// Truncated-regression imputation: ML fit bounded at c, refit at
// spec.truncreg_fallback_c on non-convergence (counted), MethodFailure if
// both fail; then posterior-style parameter perturbation and inverse-CDF
// truncated draws per missing row.
std::vector<double> impute_truncated_regression(const IncompleteDataset& ds, double c,
                                                RandomStream& rng, ImputeDiag& diag,
                                                const ImputationSpec& spec);

// m completions; imputation k draws from rng.fork(100 + k), so completions
// are independent and observed entries are shared bit-identically.
std::vector<std::vector<double>> multiply_impute(const IncompleteDataset& ds,
                                                 const ImputationSpec& spec, RandomStream& rng,
                                                 ImputeDiag* diag = nullptr);

}  // namespace skewimpute
