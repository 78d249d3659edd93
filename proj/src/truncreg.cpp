#include "skewimpute/truncreg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "skewimpute/errors.hpp"
#include "skewimpute/normal.hpp"
#include "skewimpute/regression.hpp"

namespace skewimpute {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kGradientTol = 1e-6;
constexpr double kSigmaFloor = 1e-8;
constexpr int kNelderMeadIters = 150;
constexpr int kTotalIterCap = 500;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double linear_predictor(const std::vector<double>& coefficients, const Matrix& predictors,
                        int i) {
    double mu = coefficients[0];
    for (std::size_t j = 1; j < coefficients.size(); ++j)
        mu += coefficients[j] * predictors(i, static_cast<int>(j) - 1);
    return mu;
}

void check_data(const std::vector<double>& coefficients, const Matrix& predictors,
                const std::vector<double>& response, double c) {
    if (static_cast<int>(coefficients.size()) != predictors.cols() + 1)
        throw InvalidInput("truncreg: coefficient count must be predictor columns + 1");
    if (static_cast<int>(response.size()) != predictors.rows())
        throw InvalidInput("truncreg: row count mismatch");
    for (double y : response)
        if (y < c) throw InvalidData("truncreg: response below the truncation bound");
}

// Unchecked log likelihood in the optimizer's (beta, log sigma) coordinates;
// returns -inf instead of throwing so line searches can probe freely.
double loglik_safe(const std::vector<double>& theta, const Matrix& predictors,
                   const std::vector<double>& response, double c) {
    const std::size_t p = theta.size() - 1;
    const double sigma = std::exp(theta[p]);
    if (!(sigma > 0.0) || !std::isfinite(sigma)) return kNegInf;
    double ll = 0.0;
    for (int i = 0; i < static_cast<int>(response.size()); ++i) {
        double mu = theta[0];
        for (std::size_t j = 1; j < p; ++j) mu += theta[j] * predictors(i, static_cast<int>(j) - 1);
        const double r = (response[static_cast<std::size_t>(i)] - mu) / sigma;
        ll += -0.5 * r * r - kLogSqrt2Pi - theta[p];
        if (c != kNegInf) ll -= log_std_normal_sf((c - mu) / sigma);
    }
    return std::isfinite(ll) ? ll : kNegInf;
}

std::vector<double> gradient_theta(const std::vector<double>& theta, const Matrix& predictors,
                                   const std::vector<double>& response, double c) {
    const std::size_t p = theta.size() - 1;
    const std::vector<double> beta(theta.begin(), theta.begin() + static_cast<long>(p));
    return truncreg_gradient(beta, std::exp(theta[p]), predictors, response, c);
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Negative Hessian of the log likelihood in (beta, log sigma), from central
// differences of the analytic gradient, symmetrized.
Matrix fd_neg_hessian(const std::vector<double>& theta, const Matrix& predictors,
                      const std::vector<double>& response, double c) {
    const int d = static_cast<int>(theta.size());
    Matrix neg_h(d, d);
    std::vector<double> lo = theta, hi = theta;
    for (int k = 0; k < d; ++k) {
        const std::size_t ks = static_cast<std::size_t>(k);
        const double h = 1e-5 * (1.0 + std::fabs(theta[ks]));
        hi[ks] = theta[ks] + h;
        lo[ks] = theta[ks] - h;
        const std::vector<double> gp = gradient_theta(hi, predictors, response, c);
        const std::vector<double> gm = gradient_theta(lo, predictors, response, c);
        for (int j = 0; j < d; ++j)
            neg_h(j, k) = -(gp[static_cast<std::size_t>(j)] - gm[static_cast<std::size_t>(j)]) /
                          (2.0 * h);
        hi[ks] = theta[ks];
        lo[ks] = theta[ks];
    }
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) {
            const double v = 0.5 * (neg_h(a, b) + neg_h(b, a));
            neg_h(a, b) = v;
            neg_h(b, a) = v;
        }
    return neg_h;
}

}  // namespace

double truncreg_loglik(const std::vector<double>& coefficients, double sigma,
                       const Matrix& predictors, const std::vector<double>& response,
                       double c) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw InvalidInput("truncreg_loglik: sigma must be positive");
    check_data(coefficients, predictors, response, c);
    double ll = 0.0;
    const double log_sigma = std::log(sigma);
    for (int i = 0; i < predictors.rows(); ++i) {
        const double mu = linear_predictor(coefficients, predictors, i);
        const double r = (response[static_cast<std::size_t>(i)] - mu) / sigma;
        ll += -0.5 * r * r - kLogSqrt2Pi - log_sigma;
        if (c != kNegInf) ll -= log_std_normal_sf((c - mu) / sigma);
    }
    return ll;
}

std::vector<double> truncreg_gradient(const std::vector<double>& coefficients, double sigma,
                                      const Matrix& predictors,
                                      const std::vector<double>& response, double c) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw InvalidInput("truncreg_gradient: sigma must be positive");
    check_data(coefficients, predictors, response, c);
    const std::size_t p = coefficients.size();
    std::vector<double> g(p + 1, 0.0);
    for (int i = 0; i < predictors.rows(); ++i) {
        const double mu = linear_predictor(coefficients, predictors, i);
        const double r = (response[static_cast<std::size_t>(i)] - mu) / sigma;
        double lam = 0.0, a = 0.0;
        if (c != kNegInf) {
            a = (c - mu) / sigma;
            lam = mills_ratio(a);
        }
        const double score_mu = (r - lam) / sigma;
        g[0] += score_mu;
        for (std::size_t j = 1; j < p; ++j)
            g[j] += predictors(i, static_cast<int>(j) - 1) * score_mu;
        g[p] += r * r - 1.0 - lam * a;  // with respect to log sigma
    }
    return g;
}

TruncRegFit truncreg_fit(const Matrix& predictors, const std::vector<double>& response,
                         double c, const std::vector<double>* init,
                         std::vector<double>* accepted_loglik_trace) {
    const int n = predictors.rows();
    const int p = predictors.cols() + 1;
    if (static_cast<int>(response.size()) != n)
        throw InvalidInput("truncreg_fit: row count mismatch");
    if (n <= p + 1) throw InsufficientData("truncreg_fit: need n_obs > p + 1");
    for (double y : response)
        if (y < c) throw InvalidData("truncreg_fit: response below the truncation bound");

    const std::size_t d = static_cast<std::size_t>(p) + 1;  // (beta..., log sigma)
    std::vector<double> theta(d);
    if (init != nullptr) {
        if (init->size() != d)
            throw InvalidInput("truncreg_fit: init must hold coefficients then sigma");
        if (!((*init)[d - 1] > 0.0))
            throw InvalidInput("truncreg_fit: init sigma must be positive");
        for (std::size_t j = 0; j + 1 < d; ++j) theta[j] = (*init)[j];
        theta[d - 1] = std::log((*init)[d - 1]);
    } else {
        const RegressionFit ols = ols_fit(predictors, response);
        for (std::size_t j = 0; j + 1 < d; ++j) theta[j] = ols.coefficients[j];
        theta[d - 1] = 0.5 * std::log(std::max(ols.residual_variance, 1e-12));
    }

    auto objective = [&](const std::vector<double>& th) {
        return -loglik_safe(th, predictors, response, c);
    };
    double best_ll = -objective(theta);
    auto record = [&](double ll) {
        if (accepted_loglik_trace != nullptr) accepted_loglik_trace->push_back(ll);
    };
    record(best_ll);

    TruncRegFit fit;
    fit.lower_bound = c;
    int iterations = 0;

    // --- Phase 1: Nelder-Mead burn-in. The likelihood surface can be badly
    // scaled when the truncation is severe; a few simplex sweeps get the
    // quasi-Newton phase into its basin.
    {
        std::vector<std::vector<double>> vertex(d + 1, theta);
        std::vector<double> fval(d + 1);
        for (std::size_t j = 0; j < d; ++j) vertex[j + 1][j] += 0.1 * (1.0 + std::fabs(theta[j]));
        for (std::size_t v = 0; v <= d; ++v) fval[v] = objective(vertex[v]);

        auto order = [&]() {
            for (std::size_t a = 0; a <= d; ++a)
                for (std::size_t b = a + 1; b <= d; ++b)
                    if (fval[b] < fval[a]) {
                        std::swap(fval[a], fval[b]);
                        std::swap(vertex[a], vertex[b]);
                    }
        };
        order();

        for (int it = 0; it < kNelderMeadIters; ++it) {
            ++iterations;
            std::vector<double> centroid(d, 0.0);
            for (std::size_t v = 0; v < d; ++v)
                for (std::size_t j = 0; j < d; ++j)
                    centroid[j] += vertex[v][j] / static_cast<double>(d);

            auto blend = [&](double t) {
                std::vector<double> out(d);
                for (std::size_t j = 0; j < d; ++j)
                    out[j] = centroid[j] + t * (vertex[d][j] - centroid[j]);
                return out;
            };

            const std::vector<double> refl = blend(-1.0);
            const double f_refl = objective(refl);
            if (f_refl < fval[0]) {
                const std::vector<double> expa = blend(-2.0);
                const double f_expa = objective(expa);
                if (f_expa < f_refl) {
                    vertex[d] = expa;
                    fval[d] = f_expa;
                } else {
                    vertex[d] = refl;
                    fval[d] = f_refl;
                }
            } else if (f_refl < fval[d - 1]) {
                vertex[d] = refl;
                fval[d] = f_refl;
            } else {
                const std::vector<double> contr = blend(f_refl < fval[d] ? -0.5 : 0.5);
                const double f_contr = objective(contr);
                if (f_contr < std::min(f_refl, fval[d])) {
                    vertex[d] = contr;
                    fval[d] = f_contr;
                } else {
                    for (std::size_t v = 1; v <= d; ++v) {
                        for (std::size_t j = 0; j < d; ++j)
                            vertex[v][j] = vertex[0][j] + 0.5 * (vertex[v][j] - vertex[0][j]);
                        fval[v] = objective(vertex[v]);
                    }
                }
            }
            order();
            if (-fval[0] > best_ll) {
                best_ll = -fval[0];
                record(best_ll);
            }
        }
        theta = vertex[0];
    }

    // --- Phase 2: damped Newton on a finite-difference Hessian of the
    // analytic gradient, with Armijo backtracking. Severe truncation bends
    // the likelihood into a curved, nearly flat ridge (huge sigma, runaway
    // intercept); secant updates zigzag across it and stall, while the
    // quadratic model tracks it.
    {
        double f_cur = objective(theta);
        std::vector<double> grad_ll = gradient_theta(theta, predictors, response, c);
        std::vector<double> g(d);
        for (std::size_t j = 0; j < d; ++j) g[j] = -grad_ll[j];
        int stagnant = 0;

        while (iterations < kTotalIterCap) {
            if (norm2(g) < kGradientTol) break;
            ++iterations;

            // Newton direction; if the curvature matrix will not factor,
            // boost its diagonal (Levenberg style) and finally fall back to
            // steepest descent.
            Matrix curv = fd_neg_hessian(theta, predictors, response, c);
            std::vector<double> dir(d, 0.0);
            bool have_dir = false;
            double boost = 0.0;
            for (int attempt = 0; attempt < 6 && !have_dir; ++attempt) {
                Matrix damped = curv;
                for (std::size_t j = 0; j < d; ++j) {
                    const int jj = static_cast<int>(j);
                    damped(jj, jj) += boost;
                }
                try {
                    dir = cholesky_solve(cholesky_lower(damped), g);
                    for (std::size_t j = 0; j < d; ++j) dir[j] = -dir[j];
                    have_dir = true;
                } catch (const SingularDesign&) {
                    double dmax = 0.0;
                    for (std::size_t j = 0; j < d; ++j) {
                        const int jj = static_cast<int>(j);
                        dmax = std::max(dmax, std::fabs(curv(jj, jj)));
                    }
                    boost = (boost == 0.0) ? 1e-8 * (1.0 + dmax) : boost * 100.0;
                }
            }
            double slope = 0.0;
            if (have_dir)
                for (std::size_t j = 0; j < d; ++j) slope += dir[j] * g[j];
            if (!have_dir || slope >= 0.0) {
                for (std::size_t j = 0; j < d; ++j) dir[j] = -g[j];
                slope = -norm2(g) * norm2(g);
            }

            // Near the maximizer the true per-step improvement drops below
            // the rounding noise of the objective itself; without the
            // noise allowance the sufficient-decrease test starts rejecting
            // the (essentially exact) full Newton step and the iterate
            // dithers just above the gradient tolerance forever.
            const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                                 (1.0 + std::fabs(f_cur));
            double alpha = 1.0;
            std::vector<double> trial(d);
            double f_trial = 0.0;
            bool accepted = false;
            for (int h = 0; h < 40; ++h) {
                for (std::size_t j = 0; j < d; ++j) trial[j] = theta[j] + alpha * dir[j];
                f_trial = objective(trial);
                if (f_trial <= f_cur + 1e-4 * alpha * slope + noise) {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) break;

            // When the full step is accepted outright, probe geometrically
            // longer ones; on the ridge this covers the distance fast enough
            // for the gradient to die inside the iteration budget.
            if (alpha == 1.0) {
                std::vector<double> trial2(d);
                for (int e = 0; e < 30; ++e) {
                    const double alpha2 = alpha * 2.0;
                    for (std::size_t j = 0; j < d; ++j) trial2[j] = theta[j] + alpha2 * dir[j];
                    const double f2 = objective(trial2);
                    if (!(f2 <= f_cur + 1e-4 * alpha2 * slope) || !(f2 < f_trial)) break;
                    alpha = alpha2;
                    trial = trial2;
                    f_trial = f2;
                }
            }

            const std::vector<double> grad_new = gradient_theta(trial, predictors, response, c);
            stagnant = (f_cur - f_trial <= noise) ? stagnant + 1 : 0;
            theta = trial;
            f_cur = f_trial;
            for (std::size_t j = 0; j < d; ++j) g[j] = -grad_new[j];
            if (-f_cur > best_ll) {
                best_ll = -f_cur;
                record(best_ll);
            }
            // Three noise-level steps in a row: the search is at the
            // floor of what the arithmetic can resolve, so spending the
            // rest of the budget cannot change the verdict.
            if (stagnant >= 3) break;
        }
    }

    fit.iterations = iterations;
    fit.sigma = std::exp(theta[d - 1]);
    fit.coefficients.assign(theta.begin(), theta.begin() + p);
    fit.loglik = loglik_safe(theta, predictors, response, c);

    const std::vector<double> grad_final = gradient_theta(theta, predictors, response, c);
    fit.converged = norm2(grad_final) < kGradientTol && iterations < kTotalIterCap &&
                    fit.sigma > kSigmaFloor;

    // Asymptotic covariance: inverse of the negative Hessian, built from
    // central differences of the analytic gradient in (beta, log sigma).
    fit.hessian_inverse = Matrix(static_cast<int>(d), static_cast<int>(d));
    if (fit.converged) {
        const Matrix neg_h = fd_neg_hessian(theta, predictors, response, c);
        try {
            fit.hessian_inverse = cholesky_inverse(cholesky_lower(neg_h));
            // The imputer factors this covariance again; if the inverse is so
            // ill-conditioned that it fails its own factorization, the
            // asymptotic covariance is unusable and the fit does not count.
            cholesky_lower(fit.hessian_inverse);
        } catch (const SingularDesign&) {
            fit.converged = false;  // stationary point is not a proper maximum
            fit.hessian_inverse = Matrix(static_cast<int>(d), static_cast<int>(d));
        }
    }
    return fit;
}

std::vector<double> truncreg_impute(const TruncRegFit& fit, const Matrix& predictor_rows,
                                    RandomStream& rng, long* unreachable_count) {
    const int p = static_cast<int>(fit.coefficients.size());
    if (predictor_rows.cols() + 1 != p)
        throw InvalidInput("truncreg_impute: predictor column mismatch");
    const int d = p + 1;
    const Matrix l = cholesky_lower(fit.hessian_inverse);

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(predictor_rows.rows()));
    for (int i = 0; i < predictor_rows.rows(); ++i) {
        std::vector<double> z(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) z[static_cast<std::size_t>(j)] = rng.normal();
        std::vector<double> delta(static_cast<std::size_t>(d), 0.0);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b <= a; ++b)
                delta[static_cast<std::size_t>(a)] += l(a, b) * z[static_cast<std::size_t>(b)];
        // Keep exp() in range; a +/-20 swing on log sigma is already far past
        // any plausible posterior and preserves the fat-tailed behaviour.
        delta[static_cast<std::size_t>(d - 1)] =
            std::clamp(delta[static_cast<std::size_t>(d - 1)], -20.0, 20.0);

        double mu = fit.coefficients[0] + delta[0];
        for (int j = 1; j < p; ++j)
            mu += (fit.coefficients[static_cast<std::size_t>(j)] +
                   delta[static_cast<std::size_t>(j)]) *
                  predictor_rows(i, j - 1);
        const double sigma = fit.sigma * std::exp(delta[static_cast<std::size_t>(d - 1)]);

        const double u = rng.uniform01();
        double value;
        try {
            value = truncated_normal_quantile(mu, sigma, fit.lower_bound, u);
        } catch (const UnreachableBound&) {
            if (unreachable_count != nullptr) ++(*unreachable_count);
            value = fit.lower_bound + 1e-8 * (1.0 + std::fabs(fit.lower_bound)) * u;
        }
        out.push_back(value);
    }
    return out;
}

}  // namespace skewimpute
