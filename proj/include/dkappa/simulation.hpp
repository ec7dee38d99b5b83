#pragma once

#include <cstdint>
#include <vector>

#include "dkappa/bootstrap.hpp"
#include "dkappa/design.hpp"

namespace dkappa {

// Generator for synthetic ground-truth populations. Each item's two ratings
// agree exactly with probability agreement_lambda and are independent draws
// from `marginal` otherwise; each rating is then independently replaced by
// the sentinel category with its stratum's rate.
struct PopulationModel {
    std::vector<std::int64_t> stratum_sizes;
    int categories = 2;             // includes the sentinel
    std::vector<double> marginal;   // over categories 1..c-1
    double agreement_lambda = 1.0;
    std::vector<double> sentinel_rate_first;   // per stratum
    std::vector<double> sentinel_rate_second;  // per stratum
};

RatedPopulation generate_population(const PopulationModel& model, std::uint64_t seed);

// Simple random sample without replacement of n_h items per stratum.
StratifiedSample draw_stratified_sample(const RatedPopulation& pop, const DesignFrame& frame,
                                        std::uint64_t seed);

// Largest-remainder rounding of n * N_h / N.
std::vector<std::int64_t> proportional_allocation(
    const std::vector<std::int64_t>& stratum_populations, std::int64_t sample_total);

// Census design over an existing population (n_h = N_h).
DesignFrame census_frame(const RatedPopulation& pop);

struct McStudyConfig {
    int runs = 100;
    Variant variant = Variant::V1;
    BootstrapConfig bootstrap;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

struct McStudyRun {
    bool defined = false;
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool covered = false;
};

struct McStudyReport {
    double true_kappa = 0.0;
    std::vector<McStudyRun> runs;
    int defined_runs = 0;
    double mean_estimate = 0.0;
    double bias = 0.0;
    double coverage = 0.0;       // share of defined runs whose CI covers truth
    double mean_ci_width = 0.0;
};

// Repeated-sampling study against one synthetic population: draws `runs`
// independent samples, bootstraps each, reports bias / coverage / width.
McStudyReport mc_study(const PopulationModel& model, const DesignFrame& frame,
                       const WeightMatrix& weights, const McStudyConfig& config);

}  // namespace dkappa
