#pragma once

#include <cstdint>
#include <vector>

#include "dkappa/weights.hpp"

namespace dkappa {

// Sub-population membership carried by each item. For ingested assessment
// data: Dbr = definite bibliometric rating, Ir = inconclusive one.
enum class DomainTag : unsigned char { None = 0, Dbr = 1, Ir = 2 };

enum class Variant { Plain, V1, V2, V3 };

struct RatedItem {
    std::int32_t stratum = 1;  // 1..L
    std::int32_t first = 1;    // rating by the first rater, 1..c
    std::int32_t second = 1;   // rating by the second rater, 1..c
    DomainTag tag = DomainTag::None;
};

// Finite population of dual-rated items partitioned into strata. Category c
// is the sentinel housing inconclusive or missing ratings.
class RatedPopulation {
public:
    RatedPopulation(int strata, int categories, std::vector<RatedItem> items);

    int strata() const { return strata_; }
    int categories() const { return categories_; }
    std::int64_t size() const { return static_cast<std::int64_t>(items_.size()); }
    const std::vector<RatedItem>& items() const { return items_; }
    const std::vector<std::int64_t>& stratum_sizes() const { return stratum_sizes_; }

private:
    int strata_;
    int categories_;
    std::vector<RatedItem> items_;
    std::vector<std::int64_t> stratum_sizes_;
};

// c x c table of joint rating proportions with its margins. For a full
// population table total_mass is 1; domain-restricted tables carry the
// domain's share instead.
struct JointProportions {
    int categories = 0;
    std::vector<double> cell;  // row-major, (l-1)*c + (m-1)
    std::vector<double> row;   // first-rating margins
    std::vector<double> col;   // second-rating margins
    double total_mass = 0.0;

    double at(int l, int m) const { return cell[(l - 1) * categories + (m - 1)]; }
};

JointProportions joint_proportions(const RatedPopulation& pop);

// Weighted kappa of a proportion table. Plain requires the weight dimension
// to equal the table's; the sentinel-aware variants accept either c or c-1
// since they only read entries with l,m <= c-1.
double kappa_from_proportions(const JointProportions& table, const WeightMatrix& weights,
                              Variant variant);

double population_kappa(const RatedPopulation& pop, const WeightMatrix& weights);
double population_kappa_variant(const RatedPopulation& pop, const WeightMatrix& weights,
                                Variant variant);

}  // namespace dkappa
