#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace skewimpute {

enum class Design { bivariate, trivariate };

const char* design_name(Design d);
Design design_from_name(const std::string& s);

// One incomplete dataset: x carries the missingness, y (and z in the
// trivariate design) are always complete.
struct IncompleteDataset {
    std::vector<double> x;
    std::vector<std::uint8_t> missing;  // 1 = x value is missing
    std::vector<double> y;
    std::vector<double> z;  // empty in the bivariate design

    bool has_z() const { return !z.empty(); }
    int n() const { return static_cast<int>(x.size()); }
    int n_mis() const {
        int k = 0;
        for (auto m : missing) k += m ? 1 : 0;
        return k;
    }
    int n_obs() const { return n() - n_mis(); }
};

enum class Method {
    linear,
    linear_censored,
    linear_truncated,
    quadratic,
    transform_x,
    transform_all,
    truncated_regression,
    fn_univariate,
    none,  // no-deletion oracle; analysis of the complete data
};

const char* method_name(Method m);
Method method_from_name(const std::string& s);

// The seven factorial methods, in canonical order.
const std::vector<Method>& sweep_methods();

struct ImputationSpec {
    Method method = Method::linear;
    double bound_c = 0.0;
    int m = 5;                          // imputations per incomplete dataset
    int rejection_cap = 100;            // redraw budget against bound_c
    double rejection_fallback_c = -6.0; // relaxed bound after the cap
    double truncreg_fallback_c = -1.0;  // refit bound after non-convergence
    int prior_df = 0;
};

// Counters for the rare-event plumbing a method may exercise.
struct ImputeDiag {
    long rejection_fallbacks = 0;
    long truncreg_refits = 0;
    long unreachable_tails = 0;
};

}  // namespace skewimpute
