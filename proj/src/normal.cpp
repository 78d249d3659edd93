#include "skewimpute/normal.hpp"

#include <cmath>
#include <limits>

#include "skewimpute/errors.hpp"
#include "skewimpute/rng.hpp"

namespace skewimpute {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

}  // namespace

double std_normal_pdf(double z) {
    return std::exp(-0.5 * z * z - kLogSqrt2Pi);
}

double std_normal_cdf(double z) {
    return 0.5 * std::erfc(-z * kInvSqrt2);
}

double std_normal_sf(double z) {
    return 0.5 * std::erfc(z * kInvSqrt2);
}

// Wichura's PPND16: minimax rational approximations on three regions,
// |error| < 1e-16 over the full open interval.
double std_normal_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0)) throw InvalidInput("std_normal_quantile: p must lie in (0, 1)");

    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) *
                        r +
                    4.5921953931549871457e4) *
                       r +
                   1.3731693765509461125e4) *
                      r +
                  1.9715909503065514427e3) *
                     r +
                 1.3314166789178437745e2) *
                    r +
                3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) *
                        r +
                    2.1213794301586595867e4) *
                       r +
                   5.3941960214247511077e3) *
                      r +
                  6.8718700749205790830e2) *
                     r +
                 4.2313330701600911252e1) *
                    r +
                1.0);
    }

    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) *
                       r +
                   1.27045825245236838258e0) *
                      r +
                  3.64784832476320460504e0) *
                     r +
                 5.76949722146069140550e0) *
                    r +
                4.63033784615654529590e0) *
                   r +
               1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) *
                       r +
                   1.48103976427480074590e-1) *
                      r +
                  6.89767334985100004550e-1) *
                     r +
                 1.67638483018380384940e0) *
                    r +
                2.05319162663775882187e0) *
                   r +
               1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) *
                       r +
                   2.65321895265761230930e-2) *
                      r +
                  2.96560571828504891230e-1) *
                     r +
                 1.78482653991729133580e0) *
                    r +
                5.46378491116411436990e0) *
                   r +
               6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) *
                       r +
                   7.86869131145613259100e-4) *
                      r +
                  1.48753612908506148525e-2) *
                     r +
                 1.36929880922735805310e-1) *
                    r +
                5.99832206555887937690e-1) *
                   r +
               1.0);
    }
    return (q < 0.0) ? -val : val;
}

// Hazard phi(z) / (1 - Phi(z)). Direct quotient is fine up to z = 6; past
// that numerator and denominator underflow together, so switch to the
// Laplace continued fraction lambda = z + 1/(z + 2/(z + ...)), evaluated
// bottom-up for stability.
double mills_ratio(double z) {
    if (!std::isfinite(z)) throw InvalidInput("mills_ratio: z must be finite");
    if (z <= 6.0) {
        return std_normal_pdf(z) / std_normal_sf(z);
    }
    double t = 0.0;
    for (int k = 40; k >= 1; --k) t = static_cast<double>(k) / (z + t);
    return z + t;
}

double log_std_normal_sf(double a) {
    if (!std::isfinite(a)) throw InvalidInput("log_std_normal_sf: argument must be finite");
    if (a <= 6.0) return std::log(std_normal_sf(a));
    // 1 - Phi(a) = phi(a) / lambda(a); log-space avoids the underflow at
    // a around 38 where the survival value itself denormalizes.
    return -0.5 * a * a - kLogSqrt2Pi - std::log(mills_ratio(a));
}

TruncationGeometry truncation_geometry(double mu, double sigma, double c) {
    if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mu))
        throw InvalidInput("truncation_geometry: need finite mu and sigma > 0");
    TruncationGeometry g;
    if (c == -std::numeric_limits<double>::infinity()) {
        g.z_c = -std::numeric_limits<double>::infinity();
        g.phi = 0.0;
        g.Phi = 0.0;
        g.pi_c = 0.0;
        g.lambda_c = 0.0;
        g.delta_c = 0.0;
        return g;
    }
    if (!std::isfinite(c)) throw InvalidInput("truncation_geometry: bound must be finite or -inf");
    g.z_c = (c - mu) / sigma;
    g.phi = std_normal_pdf(g.z_c);
    g.Phi = std_normal_cdf(g.z_c);
    g.pi_c = g.Phi;
    g.lambda_c = mills_ratio(g.z_c);
    g.delta_c = g.lambda_c * (g.lambda_c - g.z_c);
    return g;
}

double sample_chi_square(double nu, RandomStream& rng) { return rng.chi_square(nu); }

double truncated_normal_quantile(double mu, double sigma, double lower, double u) {
    if (!(sigma > 0.0)) throw InvalidInput("truncated_normal_quantile: sigma must be positive");
    if (!(u > 0.0) || !(u < 1.0))
        throw InvalidInput("truncated_normal_quantile: u must lie in (0, 1)");
    if (lower == -std::numeric_limits<double>::infinity())
        return mu + sigma * std_normal_quantile(u);
    const double alpha = (lower - mu) / sigma;
    // Work in the upper tail: the conditional survival shrinks by the factor
    // T = P(Z > alpha), which stays representable far beyond where the lower
    // CDF saturates to 1.
    const double T = (alpha <= 6.0)
                         ? std_normal_sf(alpha)
                         : std::exp(log_std_normal_sf(alpha));
    if (T < 1e-300)
        throw UnreachableBound("truncated_normal_quantile: bound is unreachably deep in the tail");
    double p = (1.0 - u) * T;
    if (p < 1e-316) p = 1e-316;  // keep the quantile argument normal-range
    const double z = -std_normal_quantile(p);
    return mu + sigma * z;
}

double sample_truncated_normal(double mu, double sigma, double lower, RandomStream& rng) {
    return truncated_normal_quantile(mu, sigma, lower, rng.uniform01());
}

}  // namespace skewimpute
