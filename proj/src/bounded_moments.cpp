#include "skewimpute/bounded_moments.hpp"

#include <cmath>
#include <limits>

#include "skewimpute/errors.hpp"
#include "skewimpute/normal.hpp"

namespace skewimpute {

namespace {

constexpr double kZLo = -12.0;
constexpr double kZHi = 12.0;
constexpr double kBisectTol = 1e-12;
constexpr double kNearSingularZ = 10.0;
// g_trunc(-12) = 144 exactly to double precision; at or beyond that ratio the
// bound carries no information and the normal itself already matches.
constexpr double kInactiveRatio = 144.0;

void check_pre(const BoundSpec& pre) {
    if (!(pre.pre_sd > 0.0) || !std::isfinite(pre.pre_sd) || !std::isfinite(pre.pre_mean))
        throw InvalidInput("bounded moments: need finite pre_mean and pre_sd > 0");
}

void check_target(const MomentPair& target) {
    if (!std::isfinite(target.mean) || !(target.variance > 0.0) || !std::isfinite(target.variance))
        throw InvalidInput("moment matching: need finite mean and variance > 0");
}

// (mean - c)^2 / variance of the truncated variable as a function of the
// standardized bound Z alone; strictly decreasing, 144 at Z = -12, -> 1 as
// Z -> +inf.
double ratio_truncated(double z) {
    const double lam = mills_ratio(z);
    const double delta = lam * (lam - z);
    return (lam - z) * (lam - z) / (1.0 - delta);
}

// Same ratio for the censored variable; strictly decreasing, ~144 at
// Z = -12, -> 0 as Z -> +inf.
double ratio_censored(double z) {
    const double pi = std_normal_cdf(z);
    const double lam = mills_ratio(z);
    const double delta = lam * (lam - z);
    const double s = lam - z;
    return (1.0 - pi) * s * s / ((1.0 - delta) + pi * s * s);
}

template <typename Fn>
double bisect_decreasing(Fn&& g, double r) {
    double lo = kZLo, hi = kZHi;
    while (hi - lo > kBisectTol) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) > r)
            lo = mid;  // ratio still too high: root lies to the right
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

MomentPair truncated_moments(const BoundSpec& pre) {
    check_pre(pre);
    const TruncationGeometry g = truncation_geometry(pre.pre_mean, pre.pre_sd, pre.c);
    if (g.pi_c >= 1.0)
        throw InfeasibleTarget("truncated_moments: no mass above the bound");
    MomentPair out;
    out.mean = pre.pre_mean + g.lambda_c * pre.pre_sd;
    out.variance = (1.0 - g.delta_c) * pre.pre_sd * pre.pre_sd;
    return out;
}

MomentPair censored_moments(const BoundSpec& pre) {
    check_pre(pre);
    const TruncationGeometry g = truncation_geometry(pre.pre_mean, pre.pre_sd, pre.c);
    if (pre.c == -std::numeric_limits<double>::infinity())
        return MomentPair{pre.pre_mean, pre.pre_sd * pre.pre_sd};
    const MomentPair t = truncated_moments(pre);
    MomentPair out;
    out.mean = g.pi_c * pre.c + (1.0 - g.pi_c) * t.mean;
    const double gap = t.mean - pre.c;
    out.variance = (1.0 - g.pi_c) * (t.variance + gap * gap * g.pi_c);
    return out;
}

BoundSpec match_truncated(const MomentPair& target, double c) {
    check_target(target);
    BoundSpec out{c, BoundKind::truncate, target.mean, std::sqrt(target.variance)};
    if (c == -std::numeric_limits<double>::infinity()) return out;
    if (!std::isfinite(c)) throw InvalidInput("match_truncated: bound must be finite or -inf");
    if (!(target.mean > c))
        throw InfeasibleTarget("match_truncated: target mean must exceed the bound");

    const double gap = target.mean - c;
    const double r = gap * gap / target.variance;
    if (r >= kInactiveRatio) return out;  // bound is inert at this distance
    if (r <= 1.0)
        throw InfeasibleTarget(
            "match_truncated: mean-to-bound gap too small for the variance (ratio <= 1)");
    if (r < ratio_truncated(kZHi))
        throw NearSingular("match_truncated: root beyond Z = 12, parameters unrecoverable");

    const double z = bisect_decreasing(ratio_truncated, r);
    if (z > kNearSingularZ)
        throw NearSingular("match_truncated: standardized bound beyond 10, sigma_pre diverges");
    const double lam = mills_ratio(z);
    out.pre_sd = gap / (lam - z);
    out.pre_mean = c - z * out.pre_sd;
    return out;
}

BoundSpec match_censored(const MomentPair& target, double c) {
    check_target(target);
    BoundSpec out{c, BoundKind::censor, target.mean, std::sqrt(target.variance)};
    if (c == -std::numeric_limits<double>::infinity()) return out;
    if (!std::isfinite(c)) throw InvalidInput("match_censored: bound must be finite or -inf");
    if (!(target.mean > c))
        throw InfeasibleTarget("match_censored: target mean must exceed the bound");

    const double gap = target.mean - c;
    const double r = gap * gap / target.variance;
    if (r >= kInactiveRatio) return out;
    if (r < ratio_censored(kZHi))
        throw NearSingular("match_censored: root beyond Z = 12, parameters unrecoverable");

    const double z = bisect_decreasing(ratio_censored, r);
    if (z > kNearSingularZ)
        throw NearSingular("match_censored: standardized bound beyond 10, sigma_pre diverges");
    const double pi = std_normal_cdf(z);
    const double lam = mills_ratio(z);
    out.pre_sd = gap / ((1.0 - pi) * (lam - z));
    out.pre_mean = c - z * out.pre_sd;
    return out;
}

}  // namespace skewimpute
