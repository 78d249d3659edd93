#include "skewimpute/impute.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "skewimpute/errors.hpp"
#include "skewimpute/linalg.hpp"
#include "skewimpute/regression.hpp"
#include "skewimpute/truncreg.hpp"

namespace skewimpute {

namespace {

constexpr std::uint64_t kRowNoiseBase = 1000;
constexpr std::uint64_t kTruncRegStream = 2000;

void check_mask(const std::vector<double>& values, const std::vector<std::uint8_t>& missing) {
    if (missing.size() != values.size())
        throw InvalidInput("imputation: mask and values must have equal length");
}

void check_dataset(const IncompleteDataset& ds, bool needs_y) {
    check_mask(ds.x, ds.missing);
    if (needs_y && ds.y.size() != ds.x.size())
        throw InvalidInput("imputation: y must be complete and match x in length");
    if (!ds.z.empty() && ds.z.size() != ds.x.size())
        throw InvalidInput("imputation: z must be complete and match x in length");
}

double quartic_root(double v) {
    if (v < 0.0) throw InvalidData("transform imputation: negative value under fourth root");
    return std::sqrt(std::sqrt(v));
}

// Predictor matrix builders. Rows follow the dataset order; `rows` selects
// which dataset rows are materialized.
Matrix build_predictors(const IncompleteDataset& ds, const std::vector<std::size_t>& rows,
                        Method method) {
    const bool tri = ds.has_z();
    std::size_t k = 0;
    switch (method) {
        case Method::linear:
        case Method::linear_censored:
        case Method::linear_truncated:
        case Method::transform_x:
        case Method::truncated_regression:
            k = tri ? 2 : 1;
            break;
        case Method::quadratic:
            k = tri ? 3 : 2;
            break;
        case Method::transform_all:
            k = tri ? 2 : 1;
            break;
        default:
            throw InvalidInput("build_predictors: not a regression method");
    }

    double min_y = 0.0, min_z = 0.0;
    if (method == Method::transform_all) {
        min_y = *std::min_element(ds.y.begin(), ds.y.end());
        if (tri) min_z = *std::min_element(ds.z.begin(), ds.z.end());
    }

    Matrix m(static_cast<int>(rows.size()), static_cast<int>(k));
    for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
        const std::size_t i = rows[static_cast<std::size_t>(r)];
        switch (method) {
            case Method::quadratic:
                m(r, 0) = ds.y[i];
                m(r, 1) = ds.y[i] * ds.y[i];
                if (tri) m(r, 2) = ds.z[i];
                break;
            case Method::transform_all:
                m(r, 0) = quartic_root(ds.y[i] - min_y);
                if (tri) m(r, 1) = quartic_root(ds.z[i] - min_z);
                break;
            default:
                m(r, 0) = ds.y[i];
                if (tri) m(r, 1) = ds.z[i];
                break;
        }
    }
    return m;
}

std::vector<std::size_t> rows_where(const std::vector<std::uint8_t>& missing, bool want_missing) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < missing.size(); ++i)
        if ((missing[i] != 0) == want_missing) out.push_back(i);
    return out;
}

// Shared parameter step of every normal-regression method: OLS on the
// complete cases, one posterior draw from the passed stream, and the linear
// predictor at each missing row. The per-row noise is NOT drawn here — each
// missing row i owns the substream rng.fork(1000 + i), so bound-handling
// variants can redraw one entry without shifting any other.
struct LinearImputer {
    double sd = 0.0;
    std::vector<std::size_t> mis_rows;
    std::vector<double> mu_mis;
};

LinearImputer make_linear_imputer(const IncompleteDataset& ds, Method method,
                                  const std::vector<double>& response, RandomStream& rng) {
    const std::vector<std::size_t> obs = rows_where(ds.missing, false);
    const std::vector<std::size_t> mis = rows_where(ds.missing, true);

    const Matrix x_obs = build_predictors(ds, obs, method);
    std::vector<double> resp_obs;
    resp_obs.reserve(obs.size());
    for (std::size_t i : obs) resp_obs.push_back(response[i]);

    const RegressionFit fit = ols_fit(x_obs, resp_obs);
    const PosteriorDraw draw = posterior_draw_regression(fit, 0, rng);

    LinearImputer imp;
    imp.sd = std::sqrt(draw.residual_variance);
    imp.mis_rows = mis;
    const Matrix x_mis = build_predictors(ds, mis, method);
    imp.mu_mis.reserve(mis.size());
    for (int r = 0; r < static_cast<int>(mis.size()); ++r) {
        double mu = draw.coefficients[0];
        for (std::size_t j = 1; j < draw.coefficients.size(); ++j)
            mu += draw.coefficients[j] * x_mis(r, static_cast<int>(j) - 1);
        imp.mu_mis.push_back(mu);
    }
    return imp;
}

std::vector<double> impute_regression(const IncompleteDataset& ds, Method method,
                                      RandomStream& rng) {
    check_dataset(ds, true);
    std::vector<double> out = ds.x;
    if (ds.n_mis() == 0) return out;

    const bool transform = (method == Method::transform_x || method == Method::transform_all);
    std::vector<double> response = ds.x;
    if (transform) {
        for (std::size_t i = 0; i < response.size(); ++i)
            if (ds.missing[i] == 0) response[i] = quartic_root(response[i]);
    }

    const LinearImputer imp = make_linear_imputer(ds, method, response, rng);
    for (std::size_t r = 0; r < imp.mis_rows.size(); ++r) {
        const std::size_t i = imp.mis_rows[r];
        RandomStream sub = rng.fork(kRowNoiseBase + i);
        const double t = imp.mu_mis[r] + imp.sd * sub.normal();
        out[i] = transform ? t * t * t * t : t;
    }
    return out;
}

std::vector<double> impute_linear_truncated(const IncompleteDataset& ds,
                                            const ImputationSpec& spec, RandomStream& rng,
                                            ImputeDiag* diag) {
    check_dataset(ds, true);
    std::vector<double> out = ds.x;
    if (ds.n_mis() == 0) return out;

    const LinearImputer imp = make_linear_imputer(ds, Method::linear_truncated, ds.x, rng);
    for (std::size_t r = 0; r < imp.mis_rows.size(); ++r) {
        const std::size_t i = imp.mis_rows[r];
        RandomStream sub = rng.fork(kRowNoiseBase + i);
        const double mu = imp.mu_mis[r];
        const double sd = imp.sd;
        auto redraw = [&]() { return mu + sd * sub.normal(); };
        out[i] = apply_truncation_rejection(redraw, spec.bound_c, spec.rejection_cap,
                                            spec.rejection_fallback_c, diag);
    }
    return out;
}

}  // namespace

std::vector<double> impute_fn_univariate(const std::vector<double>& values,
                                         const std::vector<std::uint8_t>& missing,
                                         int prior_df, RandomStream& rng) {
    check_mask(values, missing);
    std::vector<double> out = values;

    const std::vector<std::size_t> obs = rows_where(missing, false);
    const std::vector<std::size_t> mis = rows_where(missing, true);
    if (obs.size() < 2) throw InsufficientData("impute_fn_univariate: need at least 2 observed");
    if (mis.empty()) return out;

    double mean = 0.0;
    for (std::size_t i : obs) mean += values[i];
    mean /= static_cast<double>(obs.size());
    double ss = 0.0;
    for (std::size_t i : obs) {
        const double d = values[i] - mean;
        ss += d * d;
    }
    const double variance = ss / static_cast<double>(obs.size() - 1);

    const PosteriorDraw draw =
        posterior_draw_univariate(static_cast<int>(obs.size()), mean, variance, prior_df, rng);
    const double sd = std::sqrt(draw.residual_variance);
    for (std::size_t i : mis) {
        RandomStream sub = rng.fork(kRowNoiseBase + i);
        out[i] = draw.coefficients[0] + sd * sub.normal();
    }
    return out;
}

std::vector<double> impute_linear(const IncompleteDataset& ds, RandomStream& rng) {
    return impute_regression(ds, Method::linear, rng);
}

std::vector<double> apply_censoring(std::vector<double> values, double c) {
    for (double& v : values)
        if (v < c) v = c;
    return values;
}

double apply_truncation_rejection(const std::function<double()>& redraw, double c, int cap,
                                  double fallback_c, ImputeDiag* diag) {
    if (cap < 1) throw InvalidInput("apply_truncation_rejection: cap must be >= 1");
    double v = 0.0;
    for (int attempt = 0; attempt < cap; ++attempt) {
        v = redraw();
        if (v >= c) return v;
    }
    if (diag != nullptr) ++diag->rejection_fallbacks;
    for (int attempt = 0; attempt < cap; ++attempt) {
        v = redraw();
        if (v >= fallback_c) return v;
    }
    // A redraw source this pathological gets pinned to the relaxed bound so
    // the promise value >= min(c, fallback_c) still holds.
    return std::max(v, fallback_c);
}

std::vector<double> impute_quadratic(const IncompleteDataset& ds, RandomStream& rng) {
    return impute_regression(ds, Method::quadratic, rng);
}

std::vector<double> impute_transform_x(const IncompleteDataset& ds, RandomStream& rng) {
    return impute_regression(ds, Method::transform_x, rng);
}

std::vector<double> impute_transform_all(const IncompleteDataset& ds, RandomStream& rng) {
    return impute_regression(ds, Method::transform_all, rng);
}

namespace {

// The MLE depends on the incomplete data alone, so one fit serves every
// completion of the same dataset.
TruncRegFit truncreg_fit_with_fallback(const IncompleteDataset& ds, double c, ImputeDiag& diag,
                                       const ImputationSpec& spec) {
    const std::vector<std::size_t> obs = rows_where(ds.missing, false);
    const Matrix x_obs = build_predictors(ds, obs, Method::truncated_regression);
    std::vector<double> resp_obs;
    resp_obs.reserve(obs.size());
    for (std::size_t i : obs) resp_obs.push_back(ds.x[i]);

    TruncRegFit fit = truncreg_fit(x_obs, resp_obs, c);
    if (!fit.converged) {
        ++diag.truncreg_refits;
        fit = truncreg_fit(x_obs, resp_obs, spec.truncreg_fallback_c);
        if (!fit.converged)
            throw MethodFailure(
                "truncated regression did not converge even with the relaxed bound");
    }
    return fit;
}

std::vector<double> truncreg_complete(const IncompleteDataset& ds, const TruncRegFit& fit,
                                      RandomStream& rng, ImputeDiag& diag) {
    std::vector<double> out = ds.x;
    const std::vector<std::size_t> mis = rows_where(ds.missing, true);
    const Matrix x_mis = build_predictors(ds, mis, Method::truncated_regression);
    RandomStream sub = rng.fork(kTruncRegStream);
    const std::vector<double> values = truncreg_impute(fit, x_mis, sub, &diag.unreachable_tails);
    for (std::size_t r = 0; r < mis.size(); ++r) out[mis[r]] = values[r];
    return out;
}

}  // namespace

std::vector<double> impute_truncated_regression(const IncompleteDataset& ds, double c,
                                                RandomStream& rng, ImputeDiag& diag,
                                                const ImputationSpec& spec) {
    check_dataset(ds, true);
    if (ds.n_mis() == 0) return ds.x;
    const TruncRegFit fit = truncreg_fit_with_fallback(ds, c, diag, spec);
    return truncreg_complete(ds, fit, rng, diag);
}

std::vector<std::vector<double>> multiply_impute(const IncompleteDataset& ds,
                                                 const ImputationSpec& spec, RandomStream& rng,
                                                 ImputeDiag* diag) {
    if (spec.m < 1) throw InvalidInput("multiply_impute: m must be >= 1");
    if (spec.rejection_cap < 1) throw InvalidInput("multiply_impute: rejection_cap must be >= 1");
    const bool needs_y = (spec.method != Method::fn_univariate);
    check_dataset(ds, needs_y);
    if (ds.n_obs() < 3) throw InsufficientData("multiply_impute: need at least 3 observed");

    ImputeDiag local;
    ImputeDiag& dg = (diag != nullptr) ? *diag : local;

    std::optional<TruncRegFit> shared_fit;
    if (spec.method == Method::truncated_regression && ds.n_mis() > 0)
        shared_fit = truncreg_fit_with_fallback(ds, spec.bound_c, dg, spec);

    std::vector<std::vector<double>> completions;
    completions.reserve(static_cast<std::size_t>(spec.m));
    for (int k = 0; k < spec.m; ++k) {
        RandomStream rk = rng.fork(100 + static_cast<std::uint64_t>(k));
        switch (spec.method) {
            case Method::linear:
                completions.push_back(impute_linear(ds, rk));
                break;
            case Method::linear_censored: {
                std::vector<double> out = impute_linear(ds, rk);
                for (std::size_t i = 0; i < out.size(); ++i)
                    if (ds.missing[i] != 0 && out[i] < spec.bound_c) out[i] = spec.bound_c;
                completions.push_back(std::move(out));
                break;
            }
            case Method::linear_truncated:
                completions.push_back(impute_linear_truncated(ds, spec, rk, &dg));
                break;
            case Method::quadratic:
                completions.push_back(impute_quadratic(ds, rk));
                break;
            case Method::transform_x:
                completions.push_back(impute_transform_x(ds, rk));
                break;
            case Method::transform_all:
                completions.push_back(impute_transform_all(ds, rk));
                break;
            case Method::truncated_regression:
                completions.push_back(shared_fit ? truncreg_complete(ds, *shared_fit, rk, dg)
                                                 : ds.x);
                break;
            case Method::fn_univariate:
                completions.push_back(
                    impute_fn_univariate(ds.x, ds.missing, spec.prior_df, rk));
                break;
            case Method::none:
                throw InvalidInput("multiply_impute: 'none' is not an imputation method");
        }
    }
    return completions;
}

}  // namespace skewimpute
