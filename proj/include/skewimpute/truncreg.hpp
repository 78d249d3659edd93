#pragma once

#include <vector>

#include "skewimpute/linalg.hpp"
#include "skewimpute/rng.hpp"

namespace skewimpute {

// Maximum-likelihood truncated-normal regression: the response is
// conditionally normal but observed only above a known lower bound c, so
// each observation contributes log phi(r_i) - log sigma - log P(X >= c).
//
// hessian_inverse is the asymptotic covariance of (coefficients..., log sigma)
// — the optimizer's parameterization; note the log on sigma.
struct TruncRegFit {
    std::vector<double> coefficients;  // intercept first
    double sigma = 0.0;
    double lower_bound = 0.0;
    bool converged = false;
    int iterations = 0;
    Matrix hessian_inverse;
    double loglik = 0.0;
};

// predictors: n x k without intercept; response >= c required (InvalidData).
double truncreg_loglik(const std::vector<double>& coefficients, double sigma,
                       const Matrix& predictors, const std::vector<double>& response,
                       double c);

// Analytic gradient of the log likelihood with respect to
// (coefficients..., log sigma).
std::vector<double> truncreg_gradient(const std::vector<double>& coefficients, double sigma,
                                      const Matrix& predictors,
                                      const std::vector<double>& response, double c);

// Fit by Nelder-Mead burn-in plus damped Newton refinement (on a
// finite-difference Hessian of the analytic gradient) from the OLS starting
// point (or `init` = coefficients followed by sigma, when given). converged
// is set when the gradient norm drops below 1e-6 within 500 total
// iterations, sigma stays above 1e-8, and the negative Hessian at the
// optimum is positive definite. Callers are expected to handle
// converged == false with their own fallback.
//
// accepted_loglik_trace, when non-null, records the best log likelihood
// after every accepted step (monotone nondecreasing by construction).
TruncRegFit truncreg_fit(const Matrix& predictors, const std::vector<double>& response,
                         double c, const std::vector<double>* init = nullptr,
                         std::vector<double>* accepted_loglik_trace = nullptr);

// Impute one value per row of predictor_rows: perturb (coefficients, log
// sigma) with a multivariate normal draw from hessian_inverse, then draw
// from N(mu_i, sigma'^2) left-truncated at fit.lower_bound via the inverse
// CDF. Rows whose tail mass above the bound is unrepresentable fall back to
// the bound plus a tiny positive jitter; *unreachable_count is incremented
// for each. Consumes p+1 normals then one uniform per row.
std::vector<double> truncreg_impute(const TruncRegFit& fit, const Matrix& predictor_rows,
                                    RandomStream& rng, long* unreachable_count = nullptr);

}  // namespace skewimpute
