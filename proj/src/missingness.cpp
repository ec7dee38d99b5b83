#include "dkappa/missingness.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dkappa/common.hpp"
#include "dkappa/parallel.hpp"
#include "dkappa/rng.hpp"

namespace dkappa {

namespace {

// Absolute slack on R comparisons; the statistic is a ratio of rationals and
// exact ties do occur.
constexpr double kTieTolerance = 1e-9;

double log_choose(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

struct StratumTables {
    // term[h][x - lo[h]] = n_h * (x/n_h - theta)^2 / (theta * (1 - theta))
    // lchoose[h][x - lo[h]] = log C(n_h, x)
    std::vector<std::vector<double>> term;
    std::vector<std::vector<double>> lchoose;
    std::vector<std::int64_t> lo;
    std::vector<std::int64_t> hi;
};

StratumTables precompute_tables(const MissingCounts& counts) {
    const std::int64_t n = counts.total_sample();
    const std::int64_t y = counts.total_missing();
    const double theta = static_cast<double>(y) / static_cast<double>(n);
    const double scale = theta * (1.0 - theta);
    StratumTables t;
    const int strata = counts.strata();
    t.term.resize(static_cast<std::size_t>(strata));
    t.lchoose.resize(static_cast<std::size_t>(strata));
    t.lo.resize(static_cast<std::size_t>(strata));
    t.hi.resize(static_cast<std::size_t>(strata));
    for (int h = 0; h < strata; ++h) {
        const std::int64_t n_h = counts.sample_sizes()[static_cast<std::size_t>(h)];
        const std::int64_t lo = std::max<std::int64_t>(0, y - (n - n_h));
        const std::int64_t hi = std::min(n_h, y);
        t.lo[static_cast<std::size_t>(h)] = lo;
        t.hi[static_cast<std::size_t>(h)] = hi;
        auto& row = t.term[static_cast<std::size_t>(h)];
        auto& lch = t.lchoose[static_cast<std::size_t>(h)];
        row.resize(static_cast<std::size_t>(hi - lo + 1));
        lch.resize(static_cast<std::size_t>(hi - lo + 1));
        for (std::int64_t x = lo; x <= hi; ++x) {
            const double dev = static_cast<double>(x) / static_cast<double>(n_h) - theta;
            row[static_cast<std::size_t>(x - lo)] =
                static_cast<double>(n_h) * dev * dev / scale;
            lch[static_cast<std::size_t>(x - lo)] =
                log_choose(static_cast<double>(n_h), static_cast<double>(x));
        }
    }
    return t;
}

}  // namespace

MissingCounts::MissingCounts(std::vector<std::int64_t> sample_sizes,
                             std::vector<std::int64_t> missing)
    : sample_sizes_(std::move(sample_sizes)), missing_(std::move(missing)) {
    if (sample_sizes_.empty()) throw InvalidInput("missing counts need at least one stratum");
    if (missing_.size() != sample_sizes_.size())
        throw InvalidInput("sample-size and missing vectors differ in length");
    for (std::size_t h = 0; h < sample_sizes_.size(); ++h) {
        if (sample_sizes_[h] < 1)
            throw InvalidInput("stratum " + std::to_string(h + 1) + " has empty sample");
        if (missing_[h] < 0 || missing_[h] > sample_sizes_[h])
            throw InvalidInput("stratum " + std::to_string(h + 1) +
                               " needs 0 <= x_h <= n_h");
        total_sample_ += sample_sizes_[h];
        total_missing_ += missing_[h];
    }
}

double chi2_statistic(const MissingCounts& counts) {
    const std::int64_t n = counts.total_sample();
    const std::int64_t y = counts.total_missing();
    if (y == 0 || y == n) return 0.0;  // homogeneity holds trivially at the boundary
    const double theta = static_cast<double>(y) / static_cast<double>(n);
    const double scale = theta * (1.0 - theta);
    double r = 0.0;
    for (int h = 0; h < counts.strata(); ++h) {
        const double n_h = static_cast<double>(counts.sample_sizes()[static_cast<std::size_t>(h)]);
        const double dev =
            static_cast<double>(counts.missing()[static_cast<std::size_t>(h)]) / n_h - theta;
        r += n_h * dev * dev / scale;
    }
    return r;
}

TestResult exact_pvalue_enum(const MissingCounts& counts, std::int64_t budget) {
    const std::int64_t n = counts.total_sample();
    const std::int64_t y = counts.total_missing();
    const double observed = chi2_statistic(counts);

    TestResult result;
    result.statistic = observed;
    result.method = TestMethod::Enumeration;

    if (y == 0 || y == n) {
        result.p_value = 1.0;
        result.support_points = 1;
        result.exceedances = 1;
        result.note = "degenerate-counts: y on the boundary, homogeneity unrejectable";
        return result;
    }

    const StratumTables tables = precompute_tables(counts);
    const int strata = counts.strata();
    const double log_denom = log_choose(static_cast<double>(n), static_cast<double>(y));

    // Suffix sample capacity bounds the feasible range at each depth.
    std::vector<std::int64_t> suffix(static_cast<std::size_t>(strata) + 1, 0);
    for (int h = strata - 1; h >= 0; --h)
        suffix[static_cast<std::size_t>(h)] =
            suffix[static_cast<std::size_t>(h) + 1] +
            counts.sample_sizes()[static_cast<std::size_t>(h)];

    std::int64_t points = 0;
    std::int64_t exceed = 0;
    double p_sum = 0.0, p_comp = 0.0;  // Kahan
    double mass_sum = 0.0, mass_comp = 0.0;

    // Iterative odometer over feasible (x_1..x_L) with running partial sums
    // of the statistic and of the log probability.
    std::vector<std::int64_t> x(static_cast<std::size_t>(strata), 0);
    std::vector<double> stat_prefix(static_cast<std::size_t>(strata) + 1, 0.0);
    std::vector<double> logp_prefix(static_cast<std::size_t>(strata) + 1, 0.0);
    std::vector<std::int64_t> used(static_cast<std::size_t>(strata) + 1, 0);

    int depth = 0;
    bool descending = true;
    while (depth >= 0) {
        if (depth == strata) {
            if (++points > budget)
                throw BudgetExceeded("budget-exceeded: support larger than " +
                                     std::to_string(budget) + " points");
            const double stat = stat_prefix[static_cast<std::size_t>(strata)];
            const double logp = logp_prefix[static_cast<std::size_t>(strata)] - log_denom;
            const double prob = std::exp(logp);
            double t = mass_sum + prob;
            mass_comp += (std::abs(mass_sum) >= std::abs(prob)) ? (mass_sum - t) + prob
                                                                : (prob - t) + mass_sum;
            mass_sum = t;
            if (stat >= observed - kTieTolerance) {
                ++exceed;
                t = p_sum + prob;
                p_comp += (std::abs(p_sum) >= std::abs(prob)) ? (p_sum - t) + prob
                                                              : (prob - t) + p_sum;
                p_sum = t;
            }
            --depth;
            descending = false;
            continue;
        }
        const std::size_t d = static_cast<std::size_t>(depth);
        const std::int64_t remaining = y - used[d];
        const std::int64_t n_h = counts.sample_sizes()[d];
        const std::int64_t lo = std::max<std::int64_t>(0, remaining - suffix[d + 1]);
        const std::int64_t hi = std::min(n_h, remaining);
        if (descending) {
            x[d] = lo;
        } else {
            if (x[d] >= hi) {
                --depth;
                continue;
            }
            ++x[d];
            descending = true;
        }
        used[d + 1] = used[d] + x[d];
        stat_prefix[d + 1] =
            stat_prefix[d] + tables.term[d][static_cast<std::size_t>(x[d] - tables.lo[d])];
        logp_prefix[d + 1] =
            logp_prefix[d] + tables.lchoose[d][static_cast<std::size_t>(x[d] - tables.lo[d])];
        ++depth;
    }

    double p = (p_sum + p_comp) / (mass_sum + mass_comp);
    result.p_value = std::clamp(p, 0.0, 1.0);
    result.support_points = points;
    result.exceedances = exceed;
    return result;
}

std::int64_t hypergeometric_draw(std::mt19937_64& g, std::int64_t total, std::int64_t success,
                                 std::int64_t draws) {
    const std::int64_t lo = std::max<std::int64_t>(0, draws - (total - success));
    const std::int64_t hi = std::min(draws, success);
    if (lo >= hi) return lo;

    // Inverse transform walked outward from the mode, so term magnitudes only
    // decay and deep tails underflow harmlessly.
    std::int64_t mode = static_cast<std::int64_t>(
        (static_cast<double>(draws) + 1.0) * (static_cast<double>(success) + 1.0) /
        (static_cast<double>(total) + 2.0));
    mode = std::clamp(mode, lo, hi);

    const double log_pmf_mode =
        log_choose(static_cast<double>(success), static_cast<double>(mode)) +
        log_choose(static_cast<double>(total - success), static_cast<double>(draws - mode)) -
        log_choose(static_cast<double>(total), static_cast<double>(draws));
    const double pmf_mode = std::exp(log_pmf_mode);

    auto ratio_up = [&](std::int64_t x) {
        // pmf(x+1) / pmf(x)
        return static_cast<double>(success - x) * static_cast<double>(draws - x) /
               (static_cast<double>(x + 1) *
                static_cast<double>(total - success - draws + x + 1));
    };
    auto ratio_down = [&](std::int64_t x) {
        // pmf(x-1) / pmf(x)
        return static_cast<double>(x) * static_cast<double>(total - success - draws + x) /
               (static_cast<double>(success - x + 1) * static_cast<double>(draws - x + 1));
    };

    double u = rng::uniform01(g);
    u -= pmf_mode;
    if (u < 0.0) return mode;

    std::int64_t left = mode, right = mode;
    double term_left = pmf_mode, term_right = pmf_mode;
    for (;;) {
        const bool can_left = left > lo;
        const bool can_right = right < hi;
        if (!can_left && !can_right) return (term_right >= term_left) ? right : left;
        const double next_left = can_left ? term_left * ratio_down(left) : -1.0;
        const double next_right = can_right ? term_right * ratio_up(right) : -1.0;
        if (next_right >= next_left) {
            ++right;
            term_right = next_right;
            u -= term_right;
            if (u < 0.0) return right;
        } else {
            --left;
            term_left = next_left;
            u -= term_left;
            if (u < 0.0) return left;
        }
    }
}

std::vector<std::int64_t> multivariate_hypergeometric_draw(
    std::mt19937_64& g, const std::vector<std::int64_t>& sizes, std::int64_t y) {
    std::int64_t total = 0;
    for (std::int64_t s : sizes) total += s;
    if (y < 0 || y > total) throw InvalidInput("draw size outside [0, n]");
    std::vector<std::int64_t> out(sizes.size(), 0);
    std::int64_t remaining_total = total;
    std::int64_t remaining_draws = y;
    for (std::size_t h = 0; h + 1 < sizes.size(); ++h) {
        if (remaining_draws == 0) break;
        const std::int64_t x = hypergeometric_draw(g, remaining_total, sizes[h], remaining_draws);
        out[h] = x;
        remaining_total -= sizes[h];
        remaining_draws -= x;
    }
    if (!sizes.empty()) out[sizes.size() - 1] = remaining_draws;
    return out;
}

TestResult exact_pvalue_mc(const MissingCounts& counts, std::int64_t replicates,
                           std::uint64_t seed, unsigned threads) {
    if (replicates < 1000) throw InvalidInput("Monte Carlo p-value needs at least 1000 replicates");
    const std::int64_t n = counts.total_sample();
    const std::int64_t y = counts.total_missing();
    const double observed = chi2_statistic(counts);

    TestResult result;
    result.statistic = observed;
    result.method = TestMethod::MonteCarlo;
    result.replicates = replicates;

    if (y == 0 || y == n) {
        result.p_value = 1.0;
        result.mc_std_error = 0.0;
        result.exceedances = replicates;
        result.note = "degenerate-counts: y on the boundary, homogeneity unrejectable";
        return result;
    }

    const StratumTables tables = precompute_tables(counts);
    const int strata = counts.strata();
    const auto& sizes = counts.sample_sizes();

    std::vector<std::uint8_t> exceeded(static_cast<std::size_t>(replicates), 0);
    parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t rep) {
        auto g = rng::make_stream(seed, static_cast<std::uint64_t>(rep));
        std::int64_t remaining_total = n;
        std::int64_t remaining_draws = y;
        double stat = 0.0;
        for (int h = 0; h < strata; ++h) {
            const std::size_t hs = static_cast<std::size_t>(h);
            std::int64_t x;
            if (h + 1 < strata) {
                x = hypergeometric_draw(g, remaining_total, sizes[hs], remaining_draws);
                remaining_total -= sizes[hs];
                remaining_draws -= x;
            } else {
                x = remaining_draws;
            }
            stat += tables.term[hs][static_cast<std::size_t>(x - tables.lo[hs])];
        }
        exceeded[rep] = (stat >= observed - kTieTolerance) ? 1 : 0;
    });

    std::int64_t exceed = 0;
    for (std::uint8_t e : exceeded) exceed += e;

    const double p = (1.0 + static_cast<double>(exceed)) / (1.0 + static_cast<double>(replicates));
    result.p_value = p;
    result.mc_std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(replicates));
    result.exceedances = exceed;
    return result;
}

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_bayes_factor(const MissingCounts& counts, const PriorSpec& priors) {
    if (!(priors.a > 0.0) || !(priors.b > 0.0))
        throw InvalidInput("Beta prior parameters must be positive");
    const std::size_t strata = static_cast<std::size_t>(counts.strata());
    if (!priors.a_h.empty() && priors.a_h.size() != strata)
        throw InvalidInput("per-stratum prior vector length mismatch");
    if (!priors.b_h.empty() && priors.b_h.size() != strata)
        throw InvalidInput("per-stratum prior vector length mismatch");

    const double n = static_cast<double>(counts.total_sample());
    const double y = static_cast<double>(counts.total_missing());
    double log_bf = log_beta(priors.a, priors.b) - log_beta(y + priors.a, n - y + priors.b);
    for (std::size_t h = 0; h < strata; ++h) {
        const double a_h = priors.a_h.empty() ? 1.0 : priors.a_h[h];
        const double b_h = priors.b_h.empty() ? 1.0 : priors.b_h[h];
        if (!(a_h > 0.0) || !(b_h > 0.0))
            throw InvalidInput("Beta prior parameters must be positive");
        const double n_h = static_cast<double>(counts.sample_sizes()[h]);
        const double x_h = static_cast<double>(counts.missing()[h]);
        log_bf += log_beta(x_h + a_h, n_h - x_h + b_h) - log_beta(a_h, b_h);
    }
    return log_bf;
}

}  // namespace dkappa
