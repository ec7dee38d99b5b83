#include "dkappa/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "dkappa/common.hpp"
#include "dkappa/parallel.hpp"
#include "dkappa/rng.hpp"

namespace dkappa {

namespace {

constexpr std::uint64_t kPseudoStream = 0x70736575646f0001ULL;

void validate(const BootstrapConfig& cfg) {
    if (cfg.replicates < 100) throw InvalidInput("bootstrap needs at least 100 replicates");
    if (!(cfg.confidence_level > 0.0 && cfg.confidence_level < 1.0))
        throw InvalidInput("confidence level must lie in (0,1)");
}

// Linear-interpolation quantile of a sorted vector.
double quantile_sorted(const std::vector<double>& v, double p) {
    const std::size_t m = v.size();
    if (m == 1) return v[0];
    const double h = p * static_cast<double>(m - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= m) return v[m - 1];
    const double frac = h - static_cast<double>(lo);
    return v[lo] + frac * (v[lo + 1] - v[lo]);
}

}  // namespace

RatedPopulation build_pseudo_population(const StratifiedSample& sample, std::uint64_t seed) {
    const DesignFrame& frame = sample.frame();
    const int strata = frame.strata();

    std::vector<std::vector<RatedItem>> by_stratum(static_cast<std::size_t>(strata));
    for (const RatedItem& it : sample.items())
        by_stratum[static_cast<std::size_t>(it.stratum - 1)].push_back(it);

    std::vector<RatedItem> items;
    items.reserve(static_cast<std::size_t>(frame.population_total()));
    std::vector<std::uint32_t> pool, picked;
    for (int h = 1; h <= strata; ++h) {
        const auto& src = by_stratum[static_cast<std::size_t>(h - 1)];
        const std::int64_t n_h = frame.at(h).sample;
        const std::int64_t big_n = frame.at(h).population;
        const std::int64_t copies = big_n / n_h;
        const std::int64_t leftover = big_n - copies * n_h;
        for (const RatedItem& it : src)
            for (std::int64_t k = 0; k < copies; ++k) items.push_back(it);
        if (leftover > 0) {
            auto g = rng::make_stream(seed, static_cast<std::uint64_t>(h));
            rng::sample_indices(g, src.size(), static_cast<std::size_t>(leftover), pool, picked);
            for (std::uint32_t idx : picked) items.push_back(src[idx]);
        }
    }
    return RatedPopulation(strata, sample.categories(), std::move(items));
}

KappaEstimate bootstrap_ci(const StratifiedSample& sample, const WeightMatrix& weights,
                           Variant variant, std::optional<DomainTag> domain,
                           const BootstrapConfig& config) {
    validate(config);

    KappaEstimate point = domain ? kappa_hat_domain(sample, weights, *domain)
                                 : kappa_hat(sample, weights, variant);

    const DesignFrame& frame = sample.frame();
    const int strata = frame.strata();
    const int c = sample.categories();
    const std::size_t cells = static_cast<std::size_t>(c) * c;

    const RatedPopulation pseudo =
        build_pseudo_population(sample, rng::derive_seed(config.seed, kPseudoStream));
    std::vector<std::vector<RatedItem>> pseudo_by_stratum(static_cast<std::size_t>(strata));
    for (int h = 0; h < strata; ++h)
        pseudo_by_stratum[static_cast<std::size_t>(h)].reserve(
            static_cast<std::size_t>(frame.at(h + 1).population));
    for (const RatedItem& it : pseudo.items())
        pseudo_by_stratum[static_cast<std::size_t>(it.stratum - 1)].push_back(it);

    const double population = static_cast<double>(frame.population_total());
    const bool restrict_domain = domain.has_value();
    const DomainTag tag = domain.value_or(DomainTag::None);
    const Variant effective_variant = restrict_domain ? Variant::V1 : variant;

    const std::size_t reps = static_cast<std::size_t>(config.replicates);
    std::vector<double> estimates(reps, 0.0);
    std::vector<std::uint8_t> defined(reps, 0);

    parallel_for(reps, config.threads, [&](std::size_t rep) {
        thread_local std::vector<std::uint32_t> pool, picked;
        thread_local std::vector<std::int64_t> counts;
        counts.assign(cells * static_cast<std::size_t>(strata), 0);

        auto g = rng::make_stream(config.seed, 1 + static_cast<std::uint64_t>(rep));
        for (int h = 1; h <= strata; ++h) {
            const auto& stratum_items = pseudo_by_stratum[static_cast<std::size_t>(h - 1)];
            const std::size_t n_h = static_cast<std::size_t>(frame.at(h).sample);
            rng::sample_indices(g, stratum_items.size(), n_h, pool, picked);
            std::int64_t* block = counts.data() + static_cast<std::size_t>(h - 1) * cells;
            for (std::uint32_t idx : picked) {
                const RatedItem& it = stratum_items[idx];
                if (restrict_domain && it.tag != tag) continue;
                block[static_cast<std::size_t>(it.first - 1) * c + (it.second - 1)]++;
            }
        }

        JointProportions table;
        table.categories = c;
        table.cell.assign(cells, 0.0);
        for (int h = 1; h <= strata; ++h) {
            const Stratum& s = frame.at(h);
            const double expansion =
                static_cast<double>(s.population) / static_cast<double>(s.sample);
            const std::int64_t* block = counts.data() + static_cast<std::size_t>(h - 1) * cells;
            for (std::size_t i = 0; i < cells; ++i)
                if (block[i] != 0) table.cell[i] += static_cast<double>(block[i]) * expansion;
        }
        for (std::size_t i = 0; i < cells; ++i) table.cell[i] /= population;
        table.row.assign(static_cast<std::size_t>(c), 0.0);
        table.col.assign(static_cast<std::size_t>(c), 0.0);
        for (int l = 0; l < c; ++l)
            for (int m = 0; m < c; ++m) {
                table.row[static_cast<std::size_t>(l)] +=
                    table.cell[static_cast<std::size_t>(l) * c + m];
                table.col[static_cast<std::size_t>(m)] +=
                    table.cell[static_cast<std::size_t>(l) * c + m];
            }
        table.total_mass = 0.0;
        for (int l = 0; l < c; ++l) table.total_mass += table.row[static_cast<std::size_t>(l)];

        try {
            estimates[rep] = kappa_from_proportions(table, weights, effective_variant);
            defined[rep] = 1;
        } catch (const Error&) {
            defined[rep] = 0;
        }
    });

    std::vector<double> valid;
    valid.reserve(reps);
    for (std::size_t i = 0; i < reps; ++i)
        if (defined[i]) valid.push_back(estimates[i]);

    const std::size_t dropped = reps - valid.size();
    if (static_cast<double>(dropped) > 0.05 * static_cast<double>(reps))
        throw UnstableBootstrap("unstable-bootstrap: " + std::to_string(dropped) + " of " +
                                std::to_string(reps) + " replicates were undefined");

    std::sort(valid.begin(), valid.end());
    const double alpha = 1.0 - config.confidence_level;
    point.has_ci = true;
    point.ci_low = quantile_sorted(valid, alpha / 2.0);
    point.ci_high = quantile_sorted(valid, 1.0 - alpha / 2.0);
    point.confidence_level = config.confidence_level;
    point.replicates = config.replicates;
    return point;
}

}  // namespace dkappa
