#include "skewimpute/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "skewimpute/errors.hpp"

namespace skewimpute {

namespace {

constexpr int kMinObserved = 3;
constexpr int kMaskAttempts = 1000;

void check_cell_inputs(double nu, double rho2, int n) {
    if (!(nu > 0.0)) throw InvalidInput("experiment: nu must be positive");
    if (!(rho2 > 0.0) || !(rho2 < 1.0)) throw InvalidInput("experiment: rho2 must be in (0, 1)");
    if (n < 4) throw InvalidInput("experiment: n must be at least 4");
}

// Max-rank of each value (1-based; ties share the largest rank among them),
// i.e. rank(v_i) = #{j : v_j <= v_i}.
std::vector<int> max_ranks(const std::vector<double>& v) {
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> ranks(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto it = std::upper_bound(sorted.begin(), sorted.end(), v[i]);
        ranks[i] = static_cast<int>(it - sorted.begin());
    }
    return ranks;
}

IncompleteDataset delete_with_probabilities(const CompleteData& data,
                                            const std::vector<double>& p, RandomStream& rng,
                                            long* resamples) {
    const std::size_t n = data.x.size();
    IncompleteDataset ds;
    ds.y = data.y;
    ds.z = data.z;
    for (int attempt = 0; attempt < kMaskAttempts; ++attempt) {
        ds.x = data.x;
        ds.missing.assign(n, 0);
        int observed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (rng.uniform01() < p[i]) {
                ds.missing[i] = 1;
                // Tripwire: anything reading a deleted cell sees NaN.
                ds.x[i] = std::numeric_limits<double>::quiet_NaN();
            } else {
                ++observed;
            }
        }
        if (observed >= kMinObserved) return ds;
        if (resamples != nullptr) ++(*resamples);
    }
    throw DegenerateSample("deletion: could not leave 3 observed rows");
}

}  // namespace

CompleteData gen_bivariate(double nu, double rho2, int n, RandomStream& rng) {
    check_cell_inputs(nu, rho2, n);
    CompleteData d;
    d.x.reserve(n);
    d.y.reserve(n);
    for (int i = 0; i < n; ++i) d.x.push_back(rng.chi_square(nu));
    const double sd_e = std::sqrt(2.0 * nu * (1.0 - rho2) / rho2);
    for (int i = 0; i < n; ++i) d.y.push_back(1.0 + d.x[i] + sd_e * rng.normal());
    return d;
}

CompleteData gen_trivariate(double nu, double rho2, int n, RandomStream& rng) {
    CompleteData d = gen_bivariate(nu, rho2, n, rng);
    const double var_x = 2.0 * nu;
    const double var_y = var_x / rho2;
    const double sd_e = std::sqrt(var_x + var_y + 2.0 * var_x);  // sd of Var(x + y) noise
    d.z.reserve(n);
    for (int i = 0; i < n; ++i) d.z.push_back(1.0 + d.x[i] + d.y[i] + sd_e * rng.normal());
    return d;
}

const char* pattern_name(Pattern p) {
    switch (p) {
        case Pattern::mcar: return "mcar";
        case Pattern::tail: return "tail";
        case Pattern::peak: return "peak";
    }
    throw InvalidInput("pattern_name: unknown pattern");
}

Pattern pattern_from_name(const std::string& s) {
    if (s == "mcar") return Pattern::mcar;
    if (s == "tail") return Pattern::tail;
    if (s == "peak") return Pattern::peak;
    throw InvalidInput("pattern_from_name: unknown pattern '" + s + "'");
}

IncompleteDataset delete_mcar(const CompleteData& data, RandomStream& rng, long* resamples) {
    std::vector<double> p(data.x.size(), 0.5);
    return delete_with_probabilities(data, p, rng, resamples);
}

IncompleteDataset delete_tail(const CompleteData& data, RandomStream& rng, long* resamples) {
    const std::vector<int> ranks = max_ranks(data.y);
    const double n = static_cast<double>(data.x.size());
    std::vector<double> p(data.x.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<double>(ranks[i]) / n;
    return delete_with_probabilities(data, p, rng, resamples);
}

IncompleteDataset delete_peak(const CompleteData& data, RandomStream& rng, long* resamples) {
    const std::vector<int> ranks = max_ranks(data.y);
    const double n = static_cast<double>(data.x.size());
    std::vector<double> p(data.x.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        p[i] = 1.0 - static_cast<double>(ranks[i]) / n;
    return delete_with_probabilities(data, p, rng, resamples);
}

IncompleteDataset apply_pattern(Pattern p, const CompleteData& data, RandomStream& rng,
                                long* resamples) {
    switch (p) {
        case Pattern::mcar: return delete_mcar(data, rng, resamples);
        case Pattern::tail: return delete_tail(data, rng, resamples);
        case Pattern::peak: return delete_peak(data, rng, resamples);
    }
    throw InvalidInput("apply_pattern: unknown pattern");
}

}  // namespace skewimpute
