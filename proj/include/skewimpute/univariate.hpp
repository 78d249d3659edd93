#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace skewimpute {

// Single-variable demonstrations on a standard exponential sample with half
// the values missing completely at random. Each method completes the sample;
// the report compares observed, imputed-half, and completed distributions.
enum class DemoMethod {
    fn,                      // normal imputation with posterior-drawn mean/variance
    censor_naive,            // fn, then censor imputed values at 0
    censor_matched,          // censored normal whose post-censoring moments match
    truncate_naive,          // fn, then redraw imputed values below 0
    truncate_matched,        // truncated normal moment-matched (nearest feasible)
    sqrt_transform,          // impute sqrt(x) as normal, square back
    fourth_root_transform,   // impute x^(1/4) as normal, fourth-power back
};

const char* demo_method_name(DemoMethod m);
DemoMethod demo_method_from_name(const std::string& s);

struct DemoReport {
    std::string method;
    int n = 0;
    int n_imputed = 0;
    double observed_mean = 0, observed_var = 0, observed_skew = 0;
    double imputed_mean = 0, imputed_var = 0, imputed_skew = 0;
    double completed_mean = 0, completed_sd = 0, completed_skew = 0;
    double imputed_negative_fraction = 0;
    double completed_negative_fraction = 0;
    // Plot-ready grid: x, ECDF of observed, of imputed, of completed.
    std::vector<std::array<double, 4>> cdf_grid;
    std::string note;  // solver diagnostics (e.g. infeasible target handling)
};

DemoReport univariate_demo(DemoMethod method, int n, std::uint64_t seed);

std::string format_demo(const DemoReport& report);

// The grid as CSV (x,observed,imputed,completed).
std::string demo_grid_csv(const DemoReport& report);

}  // namespace skewimpute
