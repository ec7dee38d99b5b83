#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "dkappa/common.hpp"
#include "dkappa/missingness.hpp"
#include "dkappa/rng.hpp"
#include "test_support.hpp"

using namespace dkappa;

namespace {

// Independent enumeration oracle: odometer over x_1..x_{L-1} with the last
// coordinate forced, probabilities from direct binomial products.
double enum_oracle(const std::vector<std::int64_t>& sizes, const std::vector<std::int64_t>& xs) {
    std::int64_t n = 0, y = 0;
    for (std::size_t h = 0; h < sizes.size(); ++h) {
        n += sizes[h];
        y += xs[h];
    }
    auto choose = [](std::int64_t a, std::int64_t b) {
        double r = 1.0;
        for (std::int64_t i = 1; i <= b; ++i)
            r *= static_cast<double>(a - b + i) / static_cast<double>(i);
        return r;
    };
    const double theta = static_cast<double>(y) / static_cast<double>(n);
    auto stat = [&](const std::vector<std::int64_t>& v) {
        double r = 0.0;
        for (std::size_t h = 0; h < sizes.size(); ++h) {
            const double dev =
                static_cast<double>(v[h]) / static_cast<double>(sizes[h]) - theta;
            r += static_cast<double>(sizes[h]) * dev * dev / (theta * (1.0 - theta));
        }
        return r;
    };
    const double observed = stat(xs);
    const double denom = choose(n, y);

    double p = 0.0;
    std::vector<std::int64_t> v(sizes.size(), 0);
    const std::size_t last = sizes.size() - 1;
    for (;;) {
        std::int64_t used = 0;
        for (std::size_t h = 0; h < last; ++h) used += v[h];
        const std::int64_t tail = y - used;
        if (tail >= 0 && tail <= sizes[last]) {
            v[last] = tail;
            bool ok = true;
            for (std::size_t h = 0; h < sizes.size(); ++h)
                if (v[h] > sizes[h]) ok = false;
            if (ok && stat(v) >= observed - 1e-9) {
                double prob = 1.0;
                for (std::size_t h = 0; h < sizes.size(); ++h) prob *= choose(sizes[h], v[h]);
                p += prob / denom;
            }
        }
        std::size_t pos = 0;
        while (pos < last) {
            if (++v[pos] <= std::min(sizes[pos], y)) break;
            v[pos] = 0;
            ++pos;
        }
        if (pos == last) break;
    }
    return p;
}

}  // namespace

TEST_CASE("chi-square statistic reference values") {
    CHECK(chi2_statistic(MissingCounts({2, 2}, {1, 1})) == 0.0);
    CHECK(chi2_statistic(MissingCounts({2, 2}, {2, 0})) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(chi2_statistic(MissingCounts({10, 10}, {0, 0})) == 0.0);
    CHECK(chi2_statistic(MissingCounts({10, 10}, {10, 10})) == 0.0);
}

TEST_CASE("statistic is invariant under stratum permutation and zero iff rates equal") {
    CHECK(chi2_statistic(MissingCounts({5, 7, 9}, {1, 2, 3})) ==
          doctest::Approx(chi2_statistic(MissingCounts({9, 5, 7}, {3, 1, 2}))).epsilon(1e-14));
    CHECK(chi2_statistic(MissingCounts({4, 8}, {1, 2})) == doctest::Approx(0.0));
    CHECK(chi2_statistic(MissingCounts({4, 8}, {2, 1})) > 0.0);
}

TEST_CASE("counts validation") {
    CHECK_THROWS_AS(MissingCounts({2, 2}, {3, 0}), InvalidInput);
    CHECK_THROWS_AS(MissingCounts({2}, {1, 1}), InvalidInput);
    CHECK_THROWS_AS(MissingCounts({}, {}), InvalidInput);
    CHECK_NOTHROW(MissingCounts({5}, {2}));  // single stratum flows through
}

TEST_CASE("exact enumeration on the tiny table") {
    const TestResult r = exact_pvalue_enum(MissingCounts({2, 2}, {2, 0}));
    CHECK(r.method == TestMethod::Enumeration);
    CHECK(r.support_points == 3);
    CHECK(r.p_value == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    CHECK(exact_pvalue_enum(MissingCounts({2, 2}, {1, 1})).p_value == doctest::Approx(1.0));
    const TestResult zero = exact_pvalue_enum(MissingCounts({3, 3}, {0, 0}));
    CHECK(zero.p_value == 1.0);
    CHECK(zero.support_points == 1);
}

TEST_CASE("enumeration agrees with an independent oracle on random tables") {
    std::mt19937_64 g(701);
    for (int rep = 0; rep < 25; ++rep) {
        const int strata = 2 + static_cast<int>(g() % 2);
        std::vector<std::int64_t> sizes, xs;
        std::int64_t y = 0, n = 0;
        for (int h = 0; h < strata; ++h) {
            const std::int64_t n_h = 2 + static_cast<std::int64_t>(g() % 7);
            const std::int64_t x_h = static_cast<std::int64_t>(g() % (n_h + 1));
            sizes.push_back(n_h);
            xs.push_back(x_h);
            n += n_h;
            y += x_h;
        }
        if (y == 0 || y == n) continue;
        const MissingCounts counts(sizes, xs);
        const TestResult r = exact_pvalue_enum(counts);
        CHECK(r.p_value == doctest::Approx(enum_oracle(sizes, xs)).epsilon(1e-10));
    }
}

TEST_CASE("enumeration respects the point budget") {
    CHECK_THROWS_AS(exact_pvalue_enum(MissingCounts({50, 50, 50}, {10, 10, 10}), 100),
                    BudgetExceeded);
}

TEST_CASE("Monte Carlo p-value converges to the exact one") {
    const TestResult exact = exact_pvalue_enum(MissingCounts({2, 2}, {2, 0}));
    const TestResult mc = exact_pvalue_mc(MissingCounts({2, 2}, {2, 0}), 100000, 31);
    REQUIRE(mc.mc_std_error.has_value());
    CHECK(std::abs(mc.p_value - exact.p_value) <= 3.0 * *mc.mc_std_error);

    std::mt19937_64 g(702);
    for (int rep = 0; rep < 10; ++rep) {
        const int strata = 2 + static_cast<int>(g() % 2);
        std::vector<std::int64_t> sizes, xs;
        std::int64_t y = 0, n = 0;
        for (int h = 0; h < strata; ++h) {
            const std::int64_t n_h = 3 + static_cast<std::int64_t>(g() % 6);
            const std::int64_t x_h = static_cast<std::int64_t>(g() % (n_h + 1));
            sizes.push_back(n_h);
            xs.push_back(x_h);
            n += n_h;
            y += x_h;
        }
        if (y == 0 || y == n) continue;
        const MissingCounts counts(sizes, xs);
        const double p_exact = exact_pvalue_enum(counts).p_value;
        const TestResult approx = exact_pvalue_mc(counts, 20000, 9000 + rep);
        CHECK(std::abs(approx.p_value - p_exact) <= 4.0 * *approx.mc_std_error + 1e-12);
    }
}

TEST_CASE("Monte Carlo edge cases") {
    const TestResult boundary = exact_pvalue_mc(MissingCounts({5, 5}, {0, 0}), 2000, 1);
    CHECK(boundary.p_value == 1.0);
    CHECK_FALSE(boundary.note.empty());

    // observed statistic 0 means every draw exceeds
    const TestResult flat = exact_pvalue_mc(MissingCounts({4, 4}, {2, 2}), 2000, 2);
    CHECK(flat.p_value == doctest::Approx(1.0));

    CHECK_THROWS_AS(exact_pvalue_mc(MissingCounts({4, 4}, {2, 1}), 10, 3), InvalidInput);

    // deterministic given the seed, any thread count
    const TestResult t1 = exact_pvalue_mc(MissingCounts({30, 40, 50}, {3, 9, 4}), 50000, 55, 1);
    const TestResult t4 = exact_pvalue_mc(MissingCounts({30, 40, 50}, {3, 9, 4}), 50000, 55, 4);
    CHECK(t1.p_value == t4.p_value);
    CHECK(t1.exceedances == t4.exceedances);
}

TEST_CASE("hypergeometric sampler matches the exact law") {
    const std::int64_t total = 50, success = 18, draws = 12;
    std::mt19937_64 g(703);
    const int reps = 100000;
    std::map<std::int64_t, int> histogram;
    for (int i = 0; i < reps; ++i) ++histogram[hypergeometric_draw(g, total, success, draws)];

    auto log_choose = [](double n, double k) {
        return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    };
    double chi2 = 0.0;
    int dof = -1;
    for (std::int64_t x = 0; x <= draws; ++x) {
        const double p = std::exp(log_choose(static_cast<double>(success), static_cast<double>(x)) +
                                  log_choose(static_cast<double>(total - success),
                                             static_cast<double>(draws - x)) -
                                  log_choose(static_cast<double>(total), static_cast<double>(draws)));
        const double expected = p * reps;
        if (expected < 5.0) continue;  // merge ultra-thin tails out of the test
        const double observed = static_cast<double>(histogram[x]);
        chi2 += (observed - expected) * (observed - expected) / expected;
        ++dof;
    }
    REQUIRE(dof >= 3);
    CHECK(testsupport::chi2_sf(chi2, static_cast<double>(dof)) > 0.001);
}

TEST_CASE("sequential multivariate draw has hypergeometric margins") {
    const std::vector<std::int64_t> sizes = {12, 20, 8};
    const std::int64_t y = 15;
    std::mt19937_64 g(704);
    const int reps = 100000;
    std::vector<std::map<std::int64_t, int>> histograms(sizes.size());
    for (int i = 0; i < reps; ++i) {
        const std::vector<std::int64_t> draw = multivariate_hypergeometric_draw(g, sizes, y);
        std::int64_t total_drawn = 0;
        for (std::size_t h = 0; h < sizes.size(); ++h) {
            ++histograms[h][draw[h]];
            total_drawn += draw[h];
        }
        REQUIRE(total_drawn == y);
    }
    auto log_choose = [](double n, double k) {
        return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    };
    const std::int64_t n = 40;
    for (std::size_t h = 0; h < sizes.size(); ++h) {
        double chi2 = 0.0;
        int dof = -1;
        for (std::int64_t x = 0; x <= std::min(sizes[h], y); ++x) {
            const double p = std::exp(
                log_choose(static_cast<double>(sizes[h]), static_cast<double>(x)) +
                log_choose(static_cast<double>(n - sizes[h]), static_cast<double>(y - x)) -
                log_choose(static_cast<double>(n), static_cast<double>(y)));
            const double expected = p * reps;
            if (expected < 5.0) continue;
            const double observed = static_cast<double>(histograms[h][x]);
            chi2 += (observed - expected) * (observed - expected) / expected;
            ++dof;
        }
        REQUIRE(dof >= 2);
        CHECK(testsupport::chi2_sf(chi2, static_cast<double>(dof)) > 0.001);
    }
}

TEST_CASE("Bayes factor closed forms under uniform priors") {
    const double bf1 = std::exp(log_bayes_factor(MissingCounts({2, 2}, {0, 2})));
    CHECK(std::abs(bf1 * 3.0 / 10.0 - 1.0) <= 1e-10);

    const double bf2 = std::exp(log_bayes_factor(MissingCounts({10, 10}, {0, 0})));
    CHECK(std::abs(bf2 * 121.0 / 21.0 - 1.0) <= 1e-10);

    CHECK(log_bayes_factor(MissingCounts({7}, {3})) == 0.0);

    // stays finite in the log-gamma domain at large n
    const double huge =
        log_bayes_factor(MissingCounts({10000000, 10000000}, {1234567, 7654321}));
    CHECK(std::isfinite(huge));
}

TEST_CASE("general prior formula reduces to the uniform simplification") {
    std::mt19937_64 g(705);
    for (int rep = 0; rep < 40; ++rep) {
        const int strata = 2 + static_cast<int>(g() % 4);
        std::vector<std::int64_t> sizes, xs;
        std::int64_t y = 0, n = 0;
        for (int h = 0; h < strata; ++h) {
            const std::int64_t n_h = 1 + static_cast<std::int64_t>(g() % 10000);
            const std::int64_t x_h = static_cast<std::int64_t>(g() % (n_h + 1));
            sizes.push_back(n_h);
            xs.push_back(x_h);
            y += x_h;
            n += n_h;
        }
        const MissingCounts counts(sizes, xs);
        // independent evaluation of the simplified product formula
        auto lbeta = [](double a, double b) {
            return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
        };
        double expected = -lbeta(static_cast<double>(y) + 1.0, static_cast<double>(n - y) + 1.0);
        for (std::size_t h = 0; h < sizes.size(); ++h)
            expected += lbeta(static_cast<double>(xs[h]) + 1.0,
                              static_cast<double>(sizes[h] - xs[h]) + 1.0);
        CHECK(log_bayes_factor(counts) == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("priors are validated") {
    PriorSpec bad;
    bad.a = 0.0;
    CHECK_THROWS_AS(log_bayes_factor(MissingCounts({4, 4}, {1, 2}), bad), InvalidInput);
    PriorSpec wrong_len;
    wrong_len.a_h = {1.0};
    CHECK_THROWS_AS(log_bayes_factor(MissingCounts({4, 4}, {1, 2}), wrong_len), InvalidInput);
}
