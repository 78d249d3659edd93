#pragma once

#include "skewimpute/rng.hpp"

namespace skewimpute {

double std_normal_pdf(double z);

// Absolute error well below 1e-12; accepts +/-infinity.
double std_normal_cdf(double z);

// Upper tail probability P(Z >= z), accurate into the far tail.
double std_normal_sf(double z);

// log P(Z >= z); stable for large positive z.
double log_std_normal_sf(double z);

// Inverse CDF (Wichura's AS241, double-precision branch), p in (0, 1).
double std_normal_quantile(double p);

// Hazard phi(z) / (1 - Phi(z)). Uses the complementary-error-function form
// up to z = 6 and the Laplace continued fraction beyond, where the naive
// quotient is 0/0.
double mills_ratio(double z);

// Quantities of a normal (mu_pre, sigma_pre) relative to a lower bound c:
// the standardized bound and the tail functions that drive censored and
// truncated moments.
struct TruncationGeometry {
    double z_c;       // (c - mu_pre) / sigma_pre
    double phi;       // standard normal density at z_c
    double Phi;       // standard normal CDF at z_c
    double pi_c;      // mass below the bound, Phi(z_c)
    double lambda_c;  // Mills ratio at z_c
    double delta_c;   // lambda_c * (lambda_c - z_c)
};

// c = -infinity is accepted and gives the no-bound limit (all tail
// quantities zero).
TruncationGeometry truncation_geometry(double mu_pre, double sigma_pre, double c);

// Chi-square draw with mean nu, variance 2 nu, skew sqrt(8/nu).
double sample_chi_square(double nu, RandomStream& rng);

// Deterministic core of truncated-normal sampling: the u-quantile of
// N(mu, sigma^2) conditioned on >= lower, computed in the upper-tail form
// so extreme bounds stay accurate. Throws UnreachableBound when the tail
// mass above `lower` is below 1e-300.
double truncated_normal_quantile(double mu, double sigma, double lower, double u);

double sample_truncated_normal(double mu, double sigma, double lower, RandomStream& rng);

}  // namespace skewimpute
