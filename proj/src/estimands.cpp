#include "skewimpute/estimands.hpp"

#include <cmath>

#include "skewimpute/errors.hpp"
#include "skewimpute/linalg.hpp"
#include "skewimpute/regression.hpp"

namespace skewimpute {

const std::vector<std::string>& estimand_names(Design d) {
    static const std::vector<std::string> bi = {"x_mean",    "x_sd",     "x_skew", "slope",
                                                "intercept", "resid_sd", "r2"};
    static const std::vector<std::string> tri = {"x_mean",  "x_sd",      "x_skew",   "slope_x",
                                                 "slope_y", "intercept", "resid_sd", "r2"};
    return d == Design::bivariate ? bi : tri;
}

int estimand_count(Design d) { return d == Design::bivariate ? 7 : 8; }

int EstimateSet::count() const { return estimand_count(design); }

double EstimateSet::get(const std::string& name) const {
    const std::vector<std::string>& names = estimand_names(design);
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return v[i];
    throw InvalidInput("EstimateSet::get: unknown estimand '" + name + "'");
}

double sample_skewness(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 3) throw InsufficientData("sample_skewness: need at least 3 values");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0;
    for (double v : values) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    if (!(m2 > 0.0)) throw DegenerateSample("sample_skewness: constant input");
    return m3 / std::pow(m2, 1.5);
}

EstimateSet analyze(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& z, Design design) {
    const std::size_t n = x.size();
    if (y.size() != n) throw InvalidInput("analyze: x and y must match in length");
    if (design == Design::trivariate && z.size() != n)
        throw InvalidInput("analyze: trivariate design needs a complete z");
    if (n < 4) throw InsufficientData("analyze: need at least 4 rows");

    EstimateSet est;
    est.design = design;

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    est.v[0] = mean;
    est.v[1] = std::sqrt(ss / static_cast<double>(n - 1));
    est.v[2] = sample_skewness(x);

    // Regression block: y ~ x (bivariate) or z ~ x + y (trivariate).
    const int k = design == Design::bivariate ? 1 : 2;
    Matrix pred(static_cast<int>(n), k);
    std::vector<double> resp(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int r = static_cast<int>(i);
        pred(r, 0) = x[i];
        if (k == 2) pred(r, 1) = y[i];
        resp[i] = (design == Design::bivariate) ? y[i] : z[i];
    }
    const RegressionFit fit = ols_fit(pred, resp);

    double resp_mean = 0.0;
    for (double v : resp) resp_mean += v;
    resp_mean /= static_cast<double>(n);
    double tss = 0.0;
    for (double v : resp) tss += (v - resp_mean) * (v - resp_mean);
    const double sse =
        fit.residual_variance * (static_cast<double>(n) - static_cast<double>(k) - 1.0);
    const double r2 = (tss > 0.0) ? 1.0 - sse / tss : 0.0;

    if (design == Design::bivariate) {
        est.v[3] = fit.coefficients[1];          // slope
        est.v[4] = fit.coefficients[0];          // intercept
        est.v[5] = std::sqrt(fit.residual_variance);
        est.v[6] = r2;
    } else {
        est.v[3] = fit.coefficients[1];          // slope on x
        est.v[4] = fit.coefficients[2];          // slope on y
        est.v[5] = fit.coefficients[0];          // intercept
        est.v[6] = std::sqrt(fit.residual_variance);
        est.v[7] = r2;
    }
    return est;
}

EstimateSet mi_combine(const std::vector<EstimateSet>& estimates) {
    if (estimates.empty()) throw InvalidInput("mi_combine: no estimates");
    EstimateSet out;
    out.design = estimates.front().design;
    const int c = out.count();
    for (const EstimateSet& e : estimates) {
        if (e.design != out.design) throw InvalidInput("mi_combine: mixed designs");
        for (int j = 0; j < c; ++j) out.v[j] += e.v[j];
    }
    for (int j = 0; j < c; ++j) out.v[j] /= static_cast<double>(estimates.size());
    return out;
}

EstimateSet true_values(Design design, double nu, double rho2) {
    if (!(nu > 0.0)) throw InvalidInput("true_values: nu must be positive");
    if (!(rho2 > 0.0) || !(rho2 < 1.0)) throw InvalidInput("true_values: rho2 must be in (0, 1)");
    EstimateSet t;
    t.design = design;
    const double var_x = 2.0 * nu;
    t.v[0] = nu;
    t.v[1] = std::sqrt(var_x);
    t.v[2] = std::sqrt(8.0 / nu);
    if (design == Design::bivariate) {
        t.v[3] = 1.0;  // slope
        t.v[4] = 1.0;  // intercept
        // Var(e) = Var(x)(1 - rho2)/rho2 makes R^2(y ~ x) = rho2.
        t.v[5] = std::sqrt(var_x * (1.0 - rho2) / rho2);
        t.v[6] = rho2;
    } else {
        t.v[3] = 1.0;  // slope on x
        t.v[4] = 1.0;  // slope on y
        t.v[5] = 1.0;  // intercept
        // Var(e_z) = Var(x + y) halves the explained share exactly.
        const double var_y = var_x + var_x * (1.0 - rho2) / rho2;  // x + e with cov(x,e)=0
        const double var_xy = var_x + var_y + 2.0 * var_x;         // Var(x) + Var(y) + 2 Cov
        t.v[6] = std::sqrt(var_xy);
        t.v[7] = 0.5;
    }
    return t;
}

}  // namespace skewimpute
