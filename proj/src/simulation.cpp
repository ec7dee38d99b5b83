#include "dkappa/simulation.hpp"

#include <cmath>
#include <string>

#include "dkappa/common.hpp"
#include "dkappa/parallel.hpp"
#include "dkappa/rng.hpp"

namespace dkappa {

namespace {

void validate(const PopulationModel& model) {
    if (model.stratum_sizes.empty()) throw InvalidInput("model needs at least one stratum");
    for (std::int64_t n : model.stratum_sizes)
        if (n < 1) throw InvalidInput("stratum sizes must be positive");
    if (model.categories < 2) throw InvalidInput("invalid-category-count: need at least 2 categories");
    if (model.marginal.size() != static_cast<std::size_t>(model.categories - 1))
        throw InvalidInput("marginal must cover categories 1..c-1");
    double total = 0.0;
    for (double p : model.marginal) {
        if (!(p >= 0.0)) throw InvalidInput("marginal entries must be nonnegative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("marginal must sum to 1");
    if (!(model.agreement_lambda >= 0.0 && model.agreement_lambda <= 1.0))
        throw InvalidInput("agreement_lambda must lie in [0,1]");
    const std::size_t strata = model.stratum_sizes.size();
    if (model.sentinel_rate_first.size() != strata || model.sentinel_rate_second.size() != strata)
        throw InvalidInput("sentinel rate vectors must have one entry per stratum");
    for (std::size_t h = 0; h < strata; ++h) {
        if (!(model.sentinel_rate_first[h] >= 0.0 && model.sentinel_rate_first[h] <= 1.0) ||
            !(model.sentinel_rate_second[h] >= 0.0 && model.sentinel_rate_second[h] <= 1.0))
            throw InvalidInput("sentinel rates must lie in [0,1]");
    }
}

int draw_category(std::mt19937_64& g, const std::vector<double>& cumulative) {
    const double u = rng::uniform01(g) * cumulative.back();
    for (std::size_t k = 0; k < cumulative.size(); ++k)
        if (u < cumulative[k]) return static_cast<int>(k + 1);
    return static_cast<int>(cumulative.size());
}

}  // namespace

RatedPopulation generate_population(const PopulationModel& model, std::uint64_t seed) {
    validate(model);
    const int strata = static_cast<int>(model.stratum_sizes.size());
    const int c = model.categories;

    std::vector<double> cumulative(model.marginal.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < model.marginal.size(); ++k) {
        acc += model.marginal[k];
        cumulative[k] = acc;
    }

    std::vector<RatedItem> items;
    std::int64_t total = 0;
    for (std::int64_t n : model.stratum_sizes) total += n;
    items.reserve(static_cast<std::size_t>(total));

    for (int h = 1; h <= strata; ++h) {
        auto g = rng::make_stream(seed, static_cast<std::uint64_t>(h));
        const double rate_u = model.sentinel_rate_first[static_cast<std::size_t>(h - 1)];
        const double rate_v = model.sentinel_rate_second[static_cast<std::size_t>(h - 1)];
        const std::int64_t size = model.stratum_sizes[static_cast<std::size_t>(h - 1)];
        for (std::int64_t i = 0; i < size; ++i) {
            RatedItem item;
            item.stratum = h;
            if (rng::uniform01(g) < model.agreement_lambda) {
                item.first = item.second = draw_category(g, cumulative);
            } else {
                item.first = draw_category(g, cumulative);
                item.second = draw_category(g, cumulative);
            }
            if (rng::uniform01(g) < rate_u) item.first = c;
            if (rng::uniform01(g) < rate_v) item.second = c;
            items.push_back(item);
        }
    }
    return RatedPopulation(strata, c, std::move(items));
}

StratifiedSample draw_stratified_sample(const RatedPopulation& pop, const DesignFrame& frame,
                                        std::uint64_t seed) {
    if (frame.strata() != pop.strata())
        throw DesignError("invalid-design: frame has " + std::to_string(frame.strata()) +
                          " strata, population has " + std::to_string(pop.strata()));
    for (int h = 1; h <= frame.strata(); ++h) {
        const std::int64_t actual = pop.stratum_sizes()[static_cast<std::size_t>(h - 1)];
        if (frame.at(h).population != actual)
            throw DesignError("invalid-design: stratum " + std::to_string(h) + " frame N_h " +
                              std::to_string(frame.at(h).population) + " != population size " +
                              std::to_string(actual));
    }

    std::vector<std::vector<const RatedItem*>> by_stratum(
        static_cast<std::size_t>(pop.strata()));
    for (int h = 1; h <= pop.strata(); ++h)
        by_stratum[static_cast<std::size_t>(h - 1)].reserve(
            static_cast<std::size_t>(pop.stratum_sizes()[static_cast<std::size_t>(h - 1)]));
    for (const RatedItem& it : pop.items())
        by_stratum[static_cast<std::size_t>(it.stratum - 1)].push_back(&it);

    std::vector<RatedItem> picked_items;
    picked_items.reserve(static_cast<std::size_t>(frame.sample_total()));
    std::vector<std::uint32_t> pool, picked;
    for (int h = 1; h <= frame.strata(); ++h) {
        auto g = rng::make_stream(seed, static_cast<std::uint64_t>(h));
        const auto& stratum_items = by_stratum[static_cast<std::size_t>(h - 1)];
        rng::sample_indices(g, stratum_items.size(),
                            static_cast<std::size_t>(frame.at(h).sample), pool, picked);
        for (std::uint32_t idx : picked) picked_items.push_back(*stratum_items[idx]);
    }
    return StratifiedSample(frame, pop.categories(), std::move(picked_items));
}

std::vector<std::int64_t> proportional_allocation(
    const std::vector<std::int64_t>& stratum_populations, std::int64_t sample_total) {
    if (stratum_populations.empty()) throw InvalidInput("no strata");
    std::int64_t population = 0;
    for (std::int64_t n : stratum_populations) {
        if (n < 1) throw InvalidInput("stratum populations must be positive");
        population += n;
    }
    if (sample_total < 0 || sample_total > population)
        throw InvalidInput("sample total outside [0, N]");

    // Exact integer quotas: floor(n * N_h / N) plus one unit for the largest
    // remainders (ties broken toward earlier strata).
    const std::size_t strata = stratum_populations.size();
    std::vector<std::int64_t> allocation(strata);
    std::vector<std::pair<std::int64_t, std::size_t>> remainders(strata);
    std::int64_t assigned = 0;
    for (std::size_t h = 0; h < strata; ++h) {
        const std::int64_t scaled = sample_total * stratum_populations[h];
        allocation[h] = scaled / population;
        remainders[h] = {scaled % population, h};
        assigned += allocation[h];
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::int64_t k = 0; k < sample_total - assigned; ++k)
        ++allocation[remainders[static_cast<std::size_t>(k)].second];
    return allocation;
}

DesignFrame census_frame(const RatedPopulation& pop) {
    std::vector<Stratum> strata;
    strata.reserve(static_cast<std::size_t>(pop.strata()));
    for (int h = 1; h <= pop.strata(); ++h) {
        const std::int64_t size = pop.stratum_sizes()[static_cast<std::size_t>(h - 1)];
        strata.push_back({std::to_string(h), size, size});
    }
    return DesignFrame(std::move(strata));
}

McStudyReport mc_study(const PopulationModel& model, const DesignFrame& frame,
                       const WeightMatrix& weights, const McStudyConfig& config) {
    if (config.runs < 1) throw InvalidInput("study needs at least one run");

    const RatedPopulation pop = generate_population(model, config.seed);
    McStudyReport report;
    report.true_kappa = config.variant == Variant::Plain
                            ? population_kappa(pop, weights)
                            : population_kappa_variant(pop, weights, config.variant);
    report.runs.resize(static_cast<std::size_t>(config.runs));

    parallel_for(static_cast<std::size_t>(config.runs), config.threads, [&](std::size_t run) {
        McStudyRun& out = report.runs[run];
        BootstrapConfig bs = config.bootstrap;
        bs.seed = rng::derive_seed(config.seed, 2 * run + 1);
        bs.threads = 1;  // already parallel across runs
        try {
            const StratifiedSample sample =
                draw_stratified_sample(pop, frame, rng::derive_seed(config.seed, 2 * run));
            const KappaEstimate est =
                bootstrap_ci(sample, weights, config.variant, std::nullopt, bs);
            out.defined = true;
            out.estimate = est.point;
            out.ci_low = est.ci_low;
            out.ci_high = est.ci_high;
            out.covered = est.ci_low <= report.true_kappa && report.true_kappa <= est.ci_high;
        } catch (const Error&) {
            out.defined = false;
        }
    });

    double sum = 0.0, width = 0.0;
    int defined = 0, covered = 0;
    for (const McStudyRun& run : report.runs) {
        if (!run.defined) continue;
        ++defined;
        sum += run.estimate;
        width += run.ci_high - run.ci_low;
        if (run.covered) ++covered;
    }
    report.defined_runs = defined;
    if (defined > 0) {
        report.mean_estimate = sum / defined;
        report.bias = report.mean_estimate - report.true_kappa;
        report.coverage = static_cast<double>(covered) / defined;
        report.mean_ci_width = width / defined;
    }
    return report;
}

}  // namespace dkappa
