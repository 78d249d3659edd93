#pragma once

#include <vector>

#include "skewimpute/linalg.hpp"
#include "skewimpute/rng.hpp"

namespace skewimpute {

// OLS fit. Coefficients are intercept-first; the intercept column is added
// internally, so `p` = predictor columns + 1.
struct RegressionFit {
    std::vector<double> coefficients;
    double residual_variance = 0.0;  // SSE / (n_obs - p)
    Matrix coefficient_covariance;   // residual_variance * (X'X)^-1
    int n_obs = 0;
    int p = 0;
};

// One draw from the Bayesian posterior of a normal/regression model under a
// noninformative prior: residual_variance is the scaled-inverse-chi-square
// draw, coefficients the multivariate normal draw around the estimates.
struct PosteriorDraw {
    std::vector<double> coefficients;
    double residual_variance = 0.0;
    double chi_square_draw = 0.0;
    int prior_df = 0;
};

// predictors: n x k matrix WITHOUT the intercept column; response: length n.
// Throws InsufficientData when n <= k + 1 and SingularDesign when X'X is
// rank-deficient.
RegressionFit ols_fit(const Matrix& predictors, const std::vector<double>& response);

// Posterior draw for the mean/variance of one variable observed n_obs times:
// sigma2_PD = variance * (n_obs - 1) / U with U ~ chi^2_{n_obs - 1 + prior_df},
// mu_PD ~ N(mean, sigma2_PD / n_obs). Consumes one chi-square then one
// normal from the stream.
PosteriorDraw posterior_draw_univariate(int n_obs, double mean, double variance,
                                        int prior_df, RandomStream& rng);

// Regression version with df = n_obs - p; the coefficient draw is
// multivariate normal around the OLS coefficients with the OLS covariance
// rescaled by sigma2_PD / sigma2_hat. Consumes one chi-square then p
// normals. Throws DegenerateFit when the fit is exact (zero residual
// variance): imputing from it would remove all randomness.
PosteriorDraw posterior_draw_regression(const RegressionFit& fit, int prior_df,
                                        RandomStream& rng);

}  // namespace skewimpute
