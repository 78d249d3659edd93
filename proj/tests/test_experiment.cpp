#include "doctest.h"

#include "skewimpute/errors.hpp"
#include "skewimpute/estimands.hpp"
#include "skewimpute/experiment.hpp"
#include "skewimpute/rng.hpp"

#include <cmath>
#include <vector>

using namespace skewimpute;

TEST_CASE("bivariate generator hits its population targets") {
    RandomStream rng(938);
    const int n = 1000000;
    const CompleteData data = gen_bivariate(2.0, 0.5, n, rng);
    REQUIRE(static_cast<int>(data.x.size()) == n);
    REQUIRE(data.z.empty());

    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = data.x[static_cast<std::size_t>(i)];
        const double y = data.y[static_cast<std::size_t>(i)];
        REQUIRE(x >= 0.0);
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    const double mx = sx / n, my = sy / n;
    const double vx = sxx / n - mx * mx;
    const double vy = syy / n - my * my;
    const double cxy = sxy / n - mx * my;
    CHECK(mx == doctest::Approx(2.0).epsilon(1e-2));
    CHECK(vx == doctest::Approx(4.0).epsilon(3e-2));
    // y = 1 + x + e with Var(e) = Var(x): Var(y) = 8, slope 1, R^2 = 1/2
    CHECK(vy == doctest::Approx(8.0).epsilon(3e-2));
    CHECK(cxy / vx == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(cxy * cxy / (vx * vy) == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("bivariate generator respects the requested correlation strength") {
    RandomStream rng(939);
    const CompleteData data = gen_bivariate(2.0, 0.9, 200000, rng);
    const EstimateSet e = analyze(data.x, data.y, {}, Design::bivariate);
    CHECK(e.get("r2") == doctest::Approx(0.9).epsilon(1e-2));
    CHECK(e.get("slope") == doctest::Approx(1.0).epsilon(1e-2));

    CHECK_THROWS_AS(gen_bivariate(0.0, 0.5, 100, rng), InvalidInput);
    CHECK_THROWS_AS(gen_bivariate(2.0, 0.0, 100, rng), InvalidInput);
    CHECK_THROWS_AS(gen_bivariate(2.0, 1.0, 100, rng), InvalidInput);
}

TEST_CASE("trivariate generator pins its regression at one half") {
    RandomStream rng(940);
    const CompleteData data = gen_trivariate(2.0, 0.5, 200000, rng);
    REQUIRE(!data.z.empty());
    const EstimateSet e = analyze(data.x, data.y, data.z, Design::trivariate);
    CHECK(e.get("slope_x") == doctest::Approx(1.0).epsilon(2e-2));
    CHECK(e.get("slope_y") == doctest::Approx(1.0).epsilon(2e-2));
    CHECK(e.get("intercept") == doctest::Approx(1.0).epsilon(5e-2));
    CHECK(e.get("r2") == doctest::Approx(0.5).epsilon(1e-2));
    // conditional sd at nu = 2, rho2 = 0.5 is sqrt(20)
    CHECK(e.get("resid_sd") == doctest::Approx(std::sqrt(20.0)).epsilon(1e-2));
}

TEST_CASE("mcar deletion is half the rows, independent of y") {
    RandomStream root(941);
    long deleted_total = 0;
    double yd = 0.0, yk = 0.0;
    long nd = 0, nk = 0;
    const int datasets = 1000, n = 100;
    for (int d = 0; d < datasets; ++d) {
        RandomStream rng = root.fork(static_cast<std::uint64_t>(d));
        RandomStream gen = rng.fork(1);
        RandomStream del = rng.fork(2);
        const CompleteData data = gen_bivariate(2.0, 0.5, n, gen);
        const IncompleteDataset ds = delete_mcar(data, del);
        REQUIRE(ds.n() == n);
        for (int i = 0; i < n; ++i) {
            const std::size_t s = static_cast<std::size_t>(i);
            CHECK(ds.y[s] == data.y[s]);  // y never touched
            if (ds.missing[s]) {
                ++deleted_total;
                CHECK(std::isnan(ds.x[s]));  // tripwire against reading deleted cells
                yd += ds.y[s];
                ++nd;
            } else {
                CHECK(ds.x[s] == data.x[s]);
                yk += ds.y[s];
                ++nk;
            }
        }
    }
    const double frac = static_cast<double>(deleted_total) / (datasets * n);
    CHECK(frac == doctest::Approx(0.5).epsilon(5e-3));
    // MCAR: deleted and kept rows have the same y distribution
    const double pooled_sd = std::sqrt(8.0 * (1.0 / nd + 1.0 / nk));
    CHECK(std::fabs(yd / nd - yk / nk) < 4.0 * pooled_sd);
}

TEST_CASE("tail deletion probabilities follow the rank rule") {
    // deletion probability rank/n = {1/4, 2/4, 3/4, 1}. At n = 4 the only
    // mask leaving 3 observed rows deletes exactly the top-y row, so the
    // resampling loop forces that mask every time.
    CompleteData data;
    data.x = {10.0, 20.0, 30.0, 40.0};
    data.y = {1.0, 2.0, 3.0, 4.0};
    RandomStream root(942);
    const int trials = 2000;
    long resamples = 0;
    for (int t = 0; t < trials; ++t) {
        RandomStream rng = root.fork(static_cast<std::uint64_t>(t));
        const IncompleteDataset ds = delete_tail(data, rng, &resamples);
        CHECK(ds.missing == std::vector<std::uint8_t>{0, 0, 0, 1});
    }
    CHECK(resamples > 0);
}

TEST_CASE("tied y values share the maximum rank") {
    // sorted y = {1, 2, 5, 5, 9, 9}: the tied fives take rank 4, the tied
    // nines rank 6, so deletion probabilities are {1/6, 2/6, 4/6, 4/6, 1, 1}
    CompleteData data;
    data.x = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    data.y = {1.0, 2.0, 5.0, 5.0, 9.0, 9.0};
    RandomStream root(943);
    int hits[6] = {0, 0, 0, 0, 0, 0};
    const int trials = 3000;
    for (int t = 0; t < trials; ++t) {
        RandomStream rng = root.fork(static_cast<std::uint64_t>(t));
        const IncompleteDataset ds = delete_tail(data, rng, nullptr);
        for (int i = 0; i < 6; ++i) hits[i] += ds.missing[static_cast<std::size_t>(i)];
    }
    CHECK(hits[4] == trials);
    CHECK(hits[5] == trials);
    // conditioned on a legal mask (at most one more deletion among rows
    // 0..3), the marginals work out to {16, 40, 160, 160} / 456
    const double f0 = static_cast<double>(hits[0]) / trials;
    const double f1 = static_cast<double>(hits[1]) / trials;
    const double f2 = static_cast<double>(hits[2]) / trials;
    const double f3 = static_cast<double>(hits[3]) / trials;
    CHECK(std::fabs(f0 - 16.0 / 456.0) < 0.02);
    CHECK(std::fabs(f1 - 40.0 / 456.0) < 0.025);
    CHECK(std::fabs(f2 - 160.0 / 456.0) < 0.04);
    CHECK(std::fabs(f3 - 160.0 / 456.0) < 0.04);
    CHECK(std::fabs(f2 - f3) < 0.04);  // equal ranks, equal fate
}

TEST_CASE("peak deletion mirrors tail") {
    // deletion probability 1 - rank/n = {3/4, 1/2, 1/4, 0}; conditioned on
    // at most one deletion, the masks {none, del0, del1, del2} carry weights
    // {3, 9, 3, 1} / 16, so marginals are {9/16, 3/16, 1/16, 0}
    CompleteData data;
    data.x = {10.0, 20.0, 30.0, 40.0};
    data.y = {1.0, 2.0, 3.0, 4.0};
    RandomStream root(944);
    int hits[4] = {0, 0, 0, 0};
    const int trials = 4000;
    for (int t = 0; t < trials; ++t) {
        RandomStream rng = root.fork(static_cast<std::uint64_t>(t));
        const IncompleteDataset ds = delete_peak(data, rng, nullptr);
        for (int i = 0; i < 4; ++i) hits[i] += ds.missing[static_cast<std::size_t>(i)];
    }
    CHECK(hits[3] == 0);
    CHECK(static_cast<double>(hits[0]) / trials == doctest::Approx(9.0 / 16.0).epsilon(6e-2));
    CHECK(static_cast<double>(hits[1]) / trials == doctest::Approx(3.0 / 16.0).epsilon(2e-1));
    CHECK(static_cast<double>(hits[2]) / trials == doctest::Approx(1.0 / 16.0).epsilon(4e-1));
}

TEST_CASE("tail deletes high x, peak deletes low x") {
    RandomStream root(945);
    double tail_del = 0, tail_keep = 0, peak_del = 0, peak_keep = 0;
    long tdn = 0, tkn = 0, pdn = 0, pkn = 0;
    for (int d = 0; d < 500; ++d) {
        RandomStream rng = root.fork(static_cast<std::uint64_t>(d));
        RandomStream gen = rng.fork(1);
        RandomStream tdel = rng.fork(2);
        RandomStream pdel = rng.fork(3);
        const CompleteData data = gen_bivariate(2.0, 0.7, 100, gen);
        const IncompleteDataset t = delete_tail(data, tdel);
        const IncompleteDataset p = delete_peak(data, pdel);
        for (int i = 0; i < 100; ++i) {
            const std::size_t s = static_cast<std::size_t>(i);
            if (t.missing[s]) {
                tail_del += data.x[s];
                ++tdn;
            } else {
                tail_keep += data.x[s];
                ++tkn;
            }
            if (p.missing[s]) {
                peak_del += data.x[s];
                ++pdn;
            } else {
                peak_keep += data.x[s];
                ++pkn;
            }
        }
    }
    CHECK(tail_del / tdn > tail_keep / tkn + 0.5);
    CHECK(peak_del / pdn < peak_keep / pkn - 0.5);
}

TEST_CASE("tail deletion on three distinct rows can never leave a legal mask") {
    // rank rule deletes the top row every draw, so at most 2 of 3 rows
    // survive and the resampling loop exhausts itself
    CompleteData data;
    data.x = {1.0, 2.0, 3.0};
    data.y = {1.0, 2.0, 3.0};
    RandomStream rng(946);
    long resamples = 0;
    CHECK_THROWS_AS(delete_tail(data, rng, &resamples), DegenerateSample);
}

TEST_CASE("pattern dispatch matches the direct calls") {
    RandomStream gen(947);
    const CompleteData data = gen_bivariate(2.0, 0.5, 100, gen);
    RandomStream a(30), b(30);
    const IncompleteDataset via_enum = apply_pattern(Pattern::tail, data, a);
    const IncompleteDataset direct = delete_tail(data, b);
    CHECK(via_enum.missing == direct.missing);
    for (int i = 0; i < 100; ++i) {
        const std::size_t s = static_cast<std::size_t>(i);
        if (!via_enum.missing[s]) CHECK(via_enum.x[s] == direct.x[s]);
    }
    CHECK(pattern_from_name("mcar") == Pattern::mcar);
    CHECK(pattern_from_name("tail") == Pattern::tail);
    CHECK(pattern_from_name("peak") == Pattern::peak);
    CHECK_THROWS_AS(pattern_from_name("sideways"), InvalidInput);
    CHECK(std::string(pattern_name(Pattern::peak)) == "peak");
}
