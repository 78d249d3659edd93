#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skewimpute/dataset.hpp"
#include "skewimpute/rng.hpp"

namespace skewimpute {

struct CompleteData {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> z;  // empty in the bivariate design
};

// x ~ chi-square(nu); y = 1 + x + e with Var(e) chosen so the population
// R^2 of y on x equals rho2: Var(e) = Var(x) (1 - rho2) / rho2.
CompleteData gen_bivariate(double nu, double rho2, int n, RandomStream& rng);

// Adds z = 1 + x + y + e with Var(e) = Var(x + y), which pins the population
// R^2 of z on (x, y) at one half for every (nu, rho2).
CompleteData gen_trivariate(double nu, double rho2, int n, RandomStream& rng);

enum class Pattern { mcar, tail, peak };

const char* pattern_name(Pattern p);
Pattern pattern_from_name(const std::string& s);

// Deletion mechanisms for x. mcar deletes with constant probability 1/2;
// tail deletes with probability rank(y)/n (ties share the maximum rank), so
// high-y rows — and with them high-x rows — go missing; peak mirrors it with
// 1 - rank/n. A mask leaving fewer than 3 observed rows is redrawn
// (*resamples counts the event; at n = 100 it never fires).
IncompleteDataset delete_mcar(const CompleteData& data, RandomStream& rng,
                              long* resamples = nullptr);
IncompleteDataset delete_tail(const CompleteData& data, RandomStream& rng,
                              long* resamples = nullptr);
IncompleteDataset delete_peak(const CompleteData& data, RandomStream& rng,
                              long* resamples = nullptr);

IncompleteDataset apply_pattern(Pattern p, const CompleteData& data, RandomStream& rng,
                                long* resamples = nullptr);

// One factorial cell.
struct CellConfig {
    Design design = Design::bivariate;
    double nu = 2.0;
    double rho2 = 0.5;
    Pattern pattern = Pattern::mcar;
    Method method = Method::linear;
    int n = 100;
    int replications = 100;
    ImputationSpec spec{};
};

}  // namespace skewimpute
