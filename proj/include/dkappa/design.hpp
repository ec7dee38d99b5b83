#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dkappa/population.hpp"

namespace dkappa {

struct Stratum {
    std::string label;
    std::int64_t population = 0;  // N_h
    std::int64_t sample = 0;      // n_h
};

// Stratified design: population and sample sizes per stratum. Inclusion
// probability of an item in stratum h is n_h / N_h.
class DesignFrame {
public:
    explicit DesignFrame(std::vector<Stratum> strata);

    int strata() const { return static_cast<int>(strata_.size()); }
    const Stratum& at(int h) const { return strata_[static_cast<std::size_t>(h - 1)]; }
    const std::vector<Stratum>& all() const { return strata_; }
    std::int64_t population_total() const { return population_total_; }
    std::int64_t sample_total() const { return sample_total_; }

    // 1-based stratum index for a label, or 0 if unknown.
    int index_of(const std::string& label) const;

private:
    std::vector<Stratum> strata_;
    std::int64_t population_total_ = 0;
    std::int64_t sample_total_ = 0;
};

class StratifiedSample {
public:
    StratifiedSample(DesignFrame frame, int categories, std::vector<RatedItem> items);

    const DesignFrame& frame() const { return frame_; }
    int categories() const { return categories_; }
    std::int64_t size() const { return static_cast<std::int64_t>(items_.size()); }
    const std::vector<RatedItem>& items() const { return items_; }

    double inclusion_probability(int stratum) const {
        const Stratum& s = frame_.at(stratum);
        return static_cast<double>(s.sample) / static_cast<double>(s.population);
    }

private:
    DesignFrame frame_;
    int categories_;
    std::vector<RatedItem> items_;
};

struct KappaEstimate {
    Variant variant = Variant::Plain;
    DomainTag domain = DomainTag::None;  // None = whole population
    double point = 0.0;
    bool has_ci = false;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double confidence_level = 0.95;
    std::int64_t replicates = 0;    // bootstrap replicates behind the CI
    std::int64_t n_effective = 0;   // sampled items entering the agreement term
};

// Inverse-inclusion-probability estimate of the joint proportion table.
JointProportions ht_joint_proportions(const StratifiedSample& sample);

// Same sums restricted to items carrying the tag; inclusion probabilities
// are left untouched.
JointProportions ht_joint_proportions_domain(const StratifiedSample& sample, DomainTag domain);

KappaEstimate kappa_hat(const StratifiedSample& sample, const WeightMatrix& weights,
                        Variant variant);

// Listwise-deletion coefficient estimated on a tagged sub-population.
KappaEstimate kappa_hat_domain(const StratifiedSample& sample, const WeightMatrix& weights,
                               DomainTag domain);

}  // namespace dkappa
