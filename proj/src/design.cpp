#include "dkappa/design.hpp"

#include <string>

#include "dkappa/common.hpp"

namespace dkappa {

DesignFrame::DesignFrame(std::vector<Stratum> strata) : strata_(std::move(strata)) {
    if (strata_.empty()) throw DesignError("invalid-design: frame has no strata");
    for (std::size_t h = 0; h < strata_.size(); ++h) {
        const Stratum& s = strata_[h];
        if (s.sample < 1 || s.sample > s.population)
            throw DesignError("invalid-design: stratum " + std::to_string(h + 1) +
                              " needs 1 <= n_h <= N_h (got n=" + std::to_string(s.sample) +
                              ", N=" + std::to_string(s.population) + ")");
        population_total_ += s.population;
        sample_total_ += s.sample;
    }
}

int DesignFrame::index_of(const std::string& label) const {
    for (std::size_t h = 0; h < strata_.size(); ++h)
        if (strata_[h].label == label) return static_cast<int>(h + 1);
    return 0;
}

StratifiedSample::StratifiedSample(DesignFrame frame, int categories, std::vector<RatedItem> items)
    : frame_(std::move(frame)), categories_(categories), items_(std::move(items)) {
    if (categories_ < 2) throw InvalidInput("invalid-category-count: need at least 2 categories");
    std::vector<std::int64_t> counts(static_cast<std::size_t>(frame_.strata()), 0);
    for (const RatedItem& it : items_) {
        if (it.stratum < 1 || it.stratum > frame_.strata())
            throw DesignError("invalid-design: item stratum " + std::to_string(it.stratum) +
                              " not in frame");
        if (it.first < 1 || it.first > categories_ || it.second < 1 || it.second > categories_)
            throw InvalidInput("item rating outside 1.." + std::to_string(categories_));
        ++counts[static_cast<std::size_t>(it.stratum - 1)];
    }
    for (int h = 1; h <= frame_.strata(); ++h) {
        if (counts[static_cast<std::size_t>(h - 1)] != frame_.at(h).sample)
            throw DesignError("invalid-design: stratum " + frame_.at(h).label + " has " +
                              std::to_string(counts[static_cast<std::size_t>(h - 1)]) +
                              " items, frame says n_h = " + std::to_string(frame_.at(h).sample));
    }
}

namespace {

// Integer cell counts per stratum keep the estimator exactly invariant to
// item order; the weighted assembly below runs in fixed (h, l, m) order.
JointProportions assemble_ht(const StratifiedSample& sample, bool restrict_domain,
                             DomainTag domain) {
    const int c = sample.categories();
    const int strata = sample.frame().strata();
    const std::size_t cells = static_cast<std::size_t>(c) * c;
    std::vector<std::int64_t> counts(cells * static_cast<std::size_t>(strata), 0);
    for (const RatedItem& it : sample.items()) {
        if (restrict_domain && it.tag != domain) continue;
        counts[static_cast<std::size_t>(it.stratum - 1) * cells +
               static_cast<std::size_t>(it.first - 1) * c + (it.second - 1)]++;
    }

    const double population = static_cast<double>(sample.frame().population_total());
    JointProportions table;
    table.categories = c;
    table.cell.assign(cells, 0.0);
    for (int h = 1; h <= strata; ++h) {
        const Stratum& s = sample.frame().at(h);
        const double expansion = static_cast<double>(s.population) / static_cast<double>(s.sample);
        const std::int64_t* block = counts.data() + static_cast<std::size_t>(h - 1) * cells;
        for (std::size_t i = 0; i < cells; ++i)
            if (block[i] != 0) table.cell[i] += static_cast<double>(block[i]) * expansion;
    }
    for (std::size_t i = 0; i < cells; ++i) table.cell[i] /= population;

    table.row.assign(static_cast<std::size_t>(c), 0.0);
    table.col.assign(static_cast<std::size_t>(c), 0.0);
    for (int l = 0; l < c; ++l)
        for (int m = 0; m < c; ++m) {
            table.row[static_cast<std::size_t>(l)] += table.cell[static_cast<std::size_t>(l) * c + m];
            table.col[static_cast<std::size_t>(m)] += table.cell[static_cast<std::size_t>(l) * c + m];
        }
    table.total_mass = 0.0;
    for (int l = 0; l < c; ++l) table.total_mass += table.row[static_cast<std::size_t>(l)];
    return table;
}

std::int64_t effective_count(const StratifiedSample& sample, Variant variant, bool restrict_domain,
                             DomainTag domain) {
    const int c = sample.categories();
    std::int64_t n = 0;
    for (const RatedItem& it : sample.items()) {
        if (restrict_domain && it.tag != domain) continue;
        if (variant == Variant::Plain || (it.first < c && it.second < c)) ++n;
    }
    return n;
}

}  // namespace

JointProportions ht_joint_proportions(const StratifiedSample& sample) {
    return assemble_ht(sample, false, DomainTag::None);
}

JointProportions ht_joint_proportions_domain(const StratifiedSample& sample, DomainTag domain) {
    return assemble_ht(sample, true, domain);
}

KappaEstimate kappa_hat(const StratifiedSample& sample, const WeightMatrix& weights,
                        Variant variant) {
    KappaEstimate est;
    est.variant = variant;
    est.point = kappa_from_proportions(ht_joint_proportions(sample), weights, variant);
    est.n_effective = effective_count(sample, variant, false, DomainTag::None);
    return est;
}

KappaEstimate kappa_hat_domain(const StratifiedSample& sample, const WeightMatrix& weights,
                               DomainTag domain) {
    KappaEstimate est;
    est.variant = Variant::V1;
    est.domain = domain;
    est.point =
        kappa_from_proportions(ht_joint_proportions_domain(sample, domain), weights, Variant::V1);
    est.n_effective = effective_count(sample, Variant::V1, true, domain);
    return est;
}

}  // namespace dkappa
