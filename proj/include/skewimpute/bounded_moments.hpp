#pragma once

namespace skewimpute {

struct MomentPair {
    double mean;
    double variance;
};

enum class BoundKind { censor, truncate };

// A normal (pre_mean, pre_sd^2) together with a lower bound c and how the
// bound is applied: censoring rounds values below c up to c (point mass at
// c), truncation renormalizes the distribution above c.
struct BoundSpec {
    double c;
    BoundKind kind;
    double pre_mean;
    double pre_sd;
};

// Mean and variance of the bounded variable, evaluated from the closed-form
// tail identities. c = -infinity gives back (pre_mean, pre_sd^2).
MomentPair truncated_moments(const BoundSpec& pre);
MomentPair censored_moments(const BoundSpec& pre);

// Invert the forward formulas: find (pre_mean, pre_sd) whose censored /
// truncated moments equal `target`. The two-parameter problem reduces to one
// dimension because (mean - c)^2 / variance depends only on the standardized
// bound Z; that ratio is strictly decreasing in Z, so a bisection on
// Z in [-12, 12] (to 1e-12) is robust where Newton steps diverge near the
// infeasible boundary. Throws InfeasibleTarget when no parameters can reach
// the target (for truncation: ratio <= 1, unreachable even as Z -> inf) and
// NearSingular when the root lies beyond Z = 10, where sigma_pre blows up
// and the recovered parameters carry no precision. Ratios at the inactive
// end (root below -12) return (target mean, target sd) directly.
BoundSpec match_censored(const MomentPair& target, double c);
BoundSpec match_truncated(const MomentPair& target, double c);

}  // namespace skewimpute
