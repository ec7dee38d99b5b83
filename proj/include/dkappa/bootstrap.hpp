#pragma once

#include <cstdint>
#include <optional>

#include "dkappa/design.hpp"

namespace dkappa {

struct BootstrapConfig {
    std::int64_t replicates = 2000;
    double confidence_level = 0.95;
    std::uint64_t seed = 0;
    unsigned threads = 0;  // 0 = hardware concurrency
};

// Surrogate population: every sampled item of stratum h is replicated
// floor(N_h/n_h) times, then the stratum is topped up to exactly N_h items
// by drawing without replacement among the stratum's sampled items.
RatedPopulation build_pseudo_population(const StratifiedSample& sample, std::uint64_t seed);

// Percentile confidence interval from the estimator recomputed on stratified
// resamples of the original sizes, drawn from a pseudo-population rebuilt
// once per call. Deterministic given the seed, for any thread count.
// Replicates on which the estimator is undefined are dropped; more than 5%
// of them is an unstable-bootstrap error.
KappaEstimate bootstrap_ci(const StratifiedSample& sample, const WeightMatrix& weights,
                           Variant variant, std::optional<DomainTag> domain,
                           const BootstrapConfig& config);

}  // namespace dkappa
