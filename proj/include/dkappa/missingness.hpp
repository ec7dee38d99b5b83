#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace dkappa {

// Per-stratum sample sizes and missing counts for the homogeneity tests.
class MissingCounts {
public:
    MissingCounts(std::vector<std::int64_t> sample_sizes, std::vector<std::int64_t> missing);

    int strata() const { return static_cast<int>(sample_sizes_.size()); }
    const std::vector<std::int64_t>& sample_sizes() const { return sample_sizes_; }
    const std::vector<std::int64_t>& missing() const { return missing_; }
    std::int64_t total_sample() const { return total_sample_; }   // n
    std::int64_t total_missing() const { return total_missing_; } // y

private:
    std::vector<std::int64_t> sample_sizes_;
    std::vector<std::int64_t> missing_;
    std::int64_t total_sample_ = 0;
    std::int64_t total_missing_ = 0;
};

// Beta priors for the Bayes factor: (a, b) under homogeneity, per-stratum
// (a_h, b_h) under heterogeneity. Empty per-stratum vectors mean all ones.
struct PriorSpec {
    double a = 1.0;
    double b = 1.0;
    std::vector<double> a_h;
    std::vector<double> b_h;
};

enum class TestMethod { Enumeration, MonteCarlo };

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::optional<double> mc_std_error;  // present iff method == MonteCarlo
    TestMethod method = TestMethod::Enumeration;
    std::optional<std::int64_t> replicates;
    std::int64_t exceedances = 0;     // points or draws with R >= observed
    std::int64_t support_points = 0;  // enumeration only
    std::string note;
};

// Chi-square homogeneity statistic R. Defined as 0 when every stratum shares
// the pooled rate, including the y = 0 and y = n boundaries.
double chi2_statistic(const MissingCounts& counts);

// Exact conditional p-value P(R >= r | Y = y) by full enumeration of the
// multivariate hypergeometric support. Throws BudgetExceeded when the
// support has more points than the budget allows.
TestResult exact_pvalue_enum(const MissingCounts& counts,
                             std::int64_t budget = 10'000'000);

// Monte Carlo approximation of the same p-value with the add-one correction
// (1 + exceedances) / (1 + replicates). Deterministic given the seed.
TestResult exact_pvalue_mc(const MissingCounts& counts, std::int64_t replicates,
                           std::uint64_t seed, unsigned threads = 0);

// log of the Bayes factor of heterogeneous against homogeneous missingness
// under independent Beta priors; computed entirely in log-gamma domain.
double log_bayes_factor(const MissingCounts& counts, const PriorSpec& priors = {});

// log of Euler's Beta function.
double log_beta(double a, double b);

// One hypergeometric variate: successes among `draws` taken without
// replacement from `total` containing `success` marked items.
std::int64_t hypergeometric_draw(std::mt19937_64& g, std::int64_t total,
                                 std::int64_t success, std::int64_t draws);

// Joint draw from the multivariate hypergeometric law with parameters y and
// (n_1..n_L), built from L-1 sequential conditional hypergeometric variates.
std::vector<std::int64_t> multivariate_hypergeometric_draw(
    std::mt19937_64& g, const std::vector<std::int64_t>& sizes, std::int64_t y);

}  // namespace dkappa
