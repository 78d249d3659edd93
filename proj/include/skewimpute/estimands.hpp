#pragma once

#include <array>
#include <string>
#include <vector>

#include "skewimpute/dataset.hpp"

namespace skewimpute {

// The evaluated quantities per design, in canonical order:
//   bivariate:  x_mean x_sd x_skew slope intercept resid_sd r2
//   trivariate: x_mean x_sd x_skew slope_x slope_y intercept resid_sd r2
// where the regression is y on x (bivariate) or z on x and y (trivariate).
const std::vector<std::string>& estimand_names(Design d);

struct EstimateSet {
    Design design = Design::bivariate;
    std::array<double, 8> v{};  // first estimand_count(design) slots used

    int count() const;
    double get(const std::string& name) const;
};

int estimand_count(Design d);

// g1 = m3 / m2^(3/2) with central sample moments (no small-sample
// adjustment). Throws DegenerateSample on constant input.
double sample_skewness(const std::vector<double>& values);

EstimateSet analyze(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& z, Design design);

// Component-wise mean across imputations.
EstimateSet mi_combine(const std::vector<EstimateSet>& estimates);

// Population values the estimates are judged against: x ~ chi-square(nu),
// unit slope(s) and intercept by construction, resid_sd and r2 from the
// design's variance bookkeeping.
EstimateSet true_values(Design design, double nu, double rho2);

}  // namespace skewimpute
