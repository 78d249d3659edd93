#include "skewimpute/regression.hpp"

#include <cmath>

#include "skewimpute/errors.hpp"

namespace skewimpute {

RegressionFit ols_fit(const Matrix& predictors, const std::vector<double>& response) {
    const int n = predictors.rows();
    const int k = predictors.cols();
    const int p = k + 1;
    if (static_cast<int>(response.size()) != n) throw InvalidInput("ols_fit: row count mismatch");
    if (n <= p) throw InsufficientData("ols_fit: need more observations than parameters");

    // Normal equations on the design with a leading intercept column.
    Matrix xtx(p, p);
    std::vector<double> xty(p, 0.0);
    auto col = [&](int j, int i) -> double { return j == 0 ? 1.0 : predictors(i, j - 1); };
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < p; ++a) {
            const double xa = col(a, i);
            xty[a] += xa * response[i];
            for (int b = a; b < p; ++b) xtx(a, b) += xa * col(b, i);
        }
    }
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < a; ++b) xtx(a, b) = xtx(b, a);

    const Matrix l = cholesky_lower(xtx);
    RegressionFit fit;
    fit.coefficients = cholesky_solve(l, xty);
    fit.n_obs = n;
    fit.p = p;

    double sse = 0.0;
    for (int i = 0; i < n; ++i) {
        double yhat = 0.0;
        for (int a = 0; a < p; ++a) yhat += fit.coefficients[a] * col(a, i);
        const double r = response[i] - yhat;
        sse += r * r;
    }
    fit.residual_variance = sse / static_cast<double>(n - p);

    const Matrix xtx_inv = cholesky_inverse(l);
    fit.coefficient_covariance = Matrix(p, p);
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b)
            fit.coefficient_covariance(a, b) = fit.residual_variance * xtx_inv(a, b);
    return fit;
}

PosteriorDraw posterior_draw_univariate(int n_obs, double mean, double variance,
                                        int prior_df, RandomStream& rng) {
    if (n_obs < 2) throw InsufficientData("posterior_draw_univariate: need at least 2 values");
    if (!(variance > 0.0)) throw DegenerateFit("posterior_draw_univariate: zero variance");
    PosteriorDraw d;
    d.prior_df = prior_df;
    const double df = static_cast<double>(n_obs - 1 + prior_df);
    d.chi_square_draw = rng.chi_square(df);
    d.residual_variance = variance * static_cast<double>(n_obs - 1) / d.chi_square_draw;
    d.coefficients = {rng.normal(mean, std::sqrt(d.residual_variance / n_obs))};
    return d;
}

PosteriorDraw posterior_draw_regression(const RegressionFit& fit, int prior_df,
                                        RandomStream& rng) {
    if (!(fit.residual_variance > 0.0))
        throw DegenerateFit("posterior_draw_regression: exact fit leaves nothing to draw");
    PosteriorDraw d;
    d.prior_df = prior_df;
    const double df = static_cast<double>(fit.n_obs - fit.p + prior_df);
    d.chi_square_draw = rng.chi_square(df);
    d.residual_variance =
        fit.residual_variance * static_cast<double>(fit.n_obs - fit.p) / d.chi_square_draw;

    // beta_PD = beta_hat + L z with L L' = cov * (sigma2_PD / sigma2_hat).
    const int p = static_cast<int>(fit.coefficients.size());
    const double scale = d.residual_variance / fit.residual_variance;
    Matrix cov(p, p);
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) cov(a, b) = scale * fit.coefficient_covariance(a, b);
    const Matrix l = cholesky_lower(cov);
    std::vector<double> z(p);
    for (int a = 0; a < p; ++a) z[a] = rng.normal();
    d.coefficients = fit.coefficients;
    for (int a = 0; a < p; ++a)
        for (int b = 0; b <= a; ++b) d.coefficients[a] += l(a, b) * z[b];
    return d;
}

}  // namespace skewimpute
