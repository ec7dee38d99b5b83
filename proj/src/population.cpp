#include "dkappa/population.hpp"

#include <string>

#include "dkappa/common.hpp"

namespace dkappa {

RatedPopulation::RatedPopulation(int strata, int categories, std::vector<RatedItem> items)
    : strata_(strata), categories_(categories), items_(std::move(items)) {
    if (strata_ < 1) throw InvalidInput("population needs at least one stratum");
    if (categories_ < 2) throw InvalidInput("invalid-category-count: need at least 2 categories");
    if (items_.empty()) throw InvalidInput("invalid-input: empty population");
    stratum_sizes_.assign(static_cast<std::size_t>(strata_), 0);
    for (const RatedItem& it : items_) {
        if (it.stratum < 1 || it.stratum > strata_)
            throw InvalidInput("item stratum " + std::to_string(it.stratum) + " outside 1.." +
                               std::to_string(strata_));
        if (it.first < 1 || it.first > categories_ || it.second < 1 || it.second > categories_)
            throw InvalidInput("item rating outside 1.." + std::to_string(categories_));
        ++stratum_sizes_[static_cast<std::size_t>(it.stratum - 1)];
    }
}

JointProportions joint_proportions(const RatedPopulation& pop) {
    const int c = pop.categories();
    const double n = static_cast<double>(pop.size());
    std::vector<std::int64_t> counts(static_cast<std::size_t>(c) * c, 0);
    for (const RatedItem& it : pop.items())
        ++counts[static_cast<std::size_t>(it.first - 1) * c + (it.second - 1)];

    JointProportions table;
    table.categories = c;
    table.cell.resize(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        table.cell[i] = static_cast<double>(counts[i]) / n;
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

namespace {

void check_weight_dimension(int table_categories, const WeightMatrix& weights, Variant variant) {
    if (variant == Variant::Plain) {
        if (weights.categories() != table_categories)
            throw InvalidInput("weight matrix dimension " + std::to_string(weights.categories()) +
                               " does not match category count " + std::to_string(table_categories));
        return;
    }
    if (weights.categories() != table_categories && weights.categories() != table_categories - 1)
        throw InvalidInput("weight matrix dimension " + std::to_string(weights.categories()) +
                           " does not cover the " + std::to_string(table_categories - 1) +
                           " definite categories");
}

double ratio_or_throw(double po, double pe) {
    const double denom = 1.0 - pe;
    if (!(denom > 0.0))
        throw DegenerateError("degenerate-marginals: chance agreement saturates (p_e = 1)");
    return (po - pe) / denom;
}

}  // namespace

double kappa_from_proportions(const JointProportions& table, const WeightMatrix& weights,
                              Variant variant) {
    const int c = table.categories;
    check_weight_dimension(c, weights, variant);

    if (variant == Variant::Plain) {
        double po = 0.0, pe = 0.0;
        for (int l = 1; l <= c; ++l)
            for (int m = 1; m <= c; ++m) {
                const double w = weights.at(l, m);
                po += w * table.at(l, m);
                pe += w * table.row[static_cast<std::size_t>(l - 1)] *
                      table.col[static_cast<std::size_t>(m - 1)];
            }
        return ratio_or_throw(po, pe);
    }

    // Sentinel-aware variants read only the definite categories 1..c-1.
    const int d = c - 1;
    double mass = 0.0;        // share of items rated definitely by both
    double po_num = 0.0;
    double pe1_num = 0.0;     // deletion chance term
    double pe_margin = 0.0;   // full-margin chance term
    for (int l = 1; l <= d; ++l) {
        const double row_def = table.row[static_cast<std::size_t>(l - 1)] - table.at(l, c);
        for (int m = 1; m <= d; ++m) {
            const double w = weights.at(l, m);
            const double col_def = table.col[static_cast<std::size_t>(m - 1)] - table.at(c, m);
            mass += table.at(l, m);
            po_num += w * table.at(l, m);
            pe1_num += w * row_def * col_def;
            pe_margin += w * table.row[static_cast<std::size_t>(l - 1)] *
                         table.col[static_cast<std::size_t>(m - 1)];
        }
    }

    switch (variant) {
        case Variant::V1: {
            if (!(mass > 0.0))
                throw UndefinedCoefficient("undefined-coefficient: no fully rated items");
            const double po = po_num / mass;
            const double pe = pe1_num / (mass * mass);
            return ratio_or_throw(po, pe);
        }
        case Variant::V2: {
            if (!(mass > 0.0))
                throw UndefinedCoefficient("undefined-coefficient: no fully rated items");
            const double po = po_num / mass;
            const double denom =
                (table.total_mass - table.row[static_cast<std::size_t>(c - 1)]) *
                (table.total_mass - table.col[static_cast<std::size_t>(c - 1)]);
            if (!(denom > 0.0))
                throw UndefinedCoefficient("undefined-coefficient: a rater assigned only sentinels");
            const double pe = pe_margin / denom;
            return ratio_or_throw(po, pe);
        }
        case Variant::V3:
            return ratio_or_throw(po_num, pe_margin);
        default:
            throw InvalidInput("unknown variant");
    }
}

double population_kappa(const RatedPopulation& pop, const WeightMatrix& weights) {
    return kappa_from_proportions(joint_proportions(pop), weights, Variant::Plain);
}

double population_kappa_variant(const RatedPopulation& pop, const WeightMatrix& weights,
                                Variant variant) {
    return kappa_from_proportions(joint_proportions(pop), weights, variant);
}

}  // namespace dkappa
