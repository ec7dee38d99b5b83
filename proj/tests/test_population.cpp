#include <doctest.h>

#include <algorithm>
#include <random>

#include "dkappa/common.hpp"
#include "dkappa/population.hpp"
#include "test_support.hpp"

using namespace dkappa;

namespace {

RatedPopulation make_pop(int c, const std::vector<std::pair<int, int>>& pairs) {
    std::vector<RatedItem> items;
    for (const auto& [u, v] : pairs) items.push_back({1, u, v, DomainTag::None});
    return RatedPopulation(1, c, std::move(items));
}

std::vector<testsupport::Pair> as_pairs(const RatedPopulation& pop) {
    std::vector<testsupport::Pair> out;
    for (const RatedItem& it : pop.items()) out.push_back({it.first, it.second});
    return out;
}

}  // namespace

TEST_CASE("joint proportions from direct counting") {
    const RatedPopulation pop = make_pop(2, {{1, 1}, {1, 2}, {2, 1}, {2, 2}});
    const JointProportions t = joint_proportions(pop);
    CHECK(t.at(1, 1) == 0.25);
    CHECK(t.at(1, 2) == 0.25);
    CHECK(t.at(2, 1) == 0.25);
    CHECK(t.at(2, 2) == 0.25);
    CHECK(t.row[0] == 0.5);
    CHECK(t.col[0] == 0.5);
    CHECK(t.total_mass == doctest::Approx(1.0).epsilon(1e-14));

    const RatedPopulation ones = make_pop(2, {{1, 1}, {1, 1}});
    CHECK(joint_proportions(ones).at(1, 1) == 1.0);

    const RatedPopulation cross = make_pop(2, {{1, 2}, {2, 1}});
    const JointProportions tc = joint_proportions(cross);
    CHECK(tc.at(1, 2) == 0.5);
    CHECK(tc.at(2, 1) == 0.5);
    CHECK(tc.at(1, 1) == 0.0);
}

TEST_CASE("empty population is rejected") {
    CHECK_THROWS_AS(RatedPopulation(1, 2, {}), InvalidInput);
}

TEST_CASE("margins sum to one on random populations") {
    std::mt19937_64 g(401);
    for (int rep = 0; rep < 50; ++rep) {
        const int c = 3 + static_cast<int>(g() % 3);
        std::vector<RatedItem> items;
        const int n = 1 + static_cast<int>(g() % 60);
        for (int i = 0; i < n; ++i)
            items.push_back({1, 1 + static_cast<int>(g() % c), 1 + static_cast<int>(g() % c),
                             DomainTag::None});
        const JointProportions t = joint_proportions(RatedPopulation(1, c, std::move(items)));
        double row_sum = 0.0, col_sum = 0.0;
        for (int l = 0; l < c; ++l) {
            row_sum += t.row[static_cast<std::size_t>(l)];
            col_sum += t.col[static_cast<std::size_t>(l)];
        }
        CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(col_sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("plain kappa reference values") {
    const WeightMatrix id = identity_weights(2);

    // perfect agreement across mixed categories
    CHECK(population_kappa(make_pop(2, {{1, 1}, {2, 2}, {1, 1}}), id) == doctest::Approx(1.0));

    // independence: p_o = p_e = 0.5
    CHECK(population_kappa(make_pop(2, {{1, 1}, {1, 2}, {2, 1}, {2, 2}}), id) ==
          doctest::Approx(0.0));

    // one rater constant, the other uniform
    CHECK(population_kappa(make_pop(2, {{1, 1}, {2, 1}}), id) == doctest::Approx(0.0));
}

TEST_CASE("saturated chance agreement raises degenerate-marginals") {
    const WeightMatrix id = identity_weights(2);
    CHECK_THROWS_AS(population_kappa(make_pop(2, {{1, 1}, {1, 1}}), id), DegenerateError);
}

TEST_CASE("variants on the five-item table, against independent oracles") {
    // items (u,v): both rated only for the first three; category 3 is the sentinel
    const RatedPopulation pop = make_pop(3, {{1, 1}, {2, 2}, {1, 2}, {3, 1}, {1, 3}});
    const WeightMatrix id = identity_weights(2);

    const double v1 = population_kappa_variant(pop, id, Variant::V1);
    const double v2 = population_kappa_variant(pop, id, Variant::V2);
    const double v3 = population_kappa_variant(pop, id, Variant::V3);

    // oracle values: deletion route gives 2/5, direct evaluation of the
    // Gwet-style and null-weight definitions gives 1/3 and 2/17
    const auto pairs = as_pairs(pop);
    CHECK(v1 == doctest::Approx(testsupport::deletion_kappa(pairs, 3, id)).epsilon(1e-12));
    CHECK(v1 == doctest::Approx(2.0 / 5.0).epsilon(1e-12));
    CHECK(v2 == doctest::Approx(testsupport::naive_v2(pairs, 3, id)).epsilon(1e-12));
    CHECK(v2 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(v3 == doctest::Approx(testsupport::naive_v3(pairs, 3, id)).epsilon(1e-12));
    CHECK(v3 == doctest::Approx(2.0 / 17.0).epsilon(1e-12));
}

TEST_CASE("variants agree with oracles on random sentinel-bearing populations") {
    std::mt19937_64 g(402);
    int checked = 0;
    for (int rep = 0; rep < 120; ++rep) {
        const int c = 3 + static_cast<int>(g() % 3);
        const int n = 4 + static_cast<int>(g() % 40);
        std::vector<RatedItem> items;
        items.push_back({1, 1, 1, DomainTag::None});  // ensure a fully rated item
        for (int i = 1; i < n; ++i)
            items.push_back({1, 1 + static_cast<int>(g() % c), 1 + static_cast<int>(g() % c),
                             DomainTag::None});
        const RatedPopulation pop(1, c, std::move(items));
        const WeightMatrix w = testsupport::random_weights(g, c - 1);
        const auto pairs = as_pairs(pop);
        try {
            const double v1 = population_kappa_variant(pop, w, Variant::V1);
            const double v2 = population_kappa_variant(pop, w, Variant::V2);
            const double v3 = population_kappa_variant(pop, w, Variant::V3);
            CHECK(v1 == doctest::Approx(testsupport::deletion_kappa(pairs, c, w)).epsilon(1e-11));
            CHECK(v2 == doctest::Approx(testsupport::naive_v2(pairs, c, w)).epsilon(1e-11));
            CHECK(v3 == doctest::Approx(testsupport::naive_v3(pairs, c, w)).epsilon(1e-11));
            CHECK(v1 <= 1.0 + 1e-12);
            CHECK(v2 <= 1.0 + 1e-12);
            CHECK(v3 <= 1.0 + 1e-12);
            ++checked;
        } catch (const DegenerateError&) {
            // rare saturated tables are fine to skip
        }
    }
    CHECK(checked > 80);
}

TEST_CASE("variant collapse when the sentinel category is empty") {
    std::mt19937_64 g(403);
    for (int rep = 0; rep < 60; ++rep) {
        const int c = 3 + static_cast<int>(g() % 3);
        const int n = 5 + static_cast<int>(g() % 30);
        std::vector<RatedItem> items;
        for (int i = 0; i < n; ++i)
            items.push_back({1, 1 + static_cast<int>(g() % (c - 1)),
                             1 + static_cast<int>(g() % (c - 1)), DomainTag::None});
        std::vector<RatedItem> restricted = items;
        const RatedPopulation pop(1, c, std::move(items));
        const WeightMatrix w = testsupport::random_weights(g, c - 1);
        try {
            const double v1 = population_kappa_variant(pop, w, Variant::V1);
            const double v2 = population_kappa_variant(pop, w, Variant::V2);
            const double v3 = population_kappa_variant(pop, w, Variant::V3);
            const double plain =
                population_kappa(RatedPopulation(1, c - 1, std::move(restricted)), w);
            CHECK(std::abs(v1 - v2) <= 1e-12);
            CHECK(std::abs(v1 - v3) <= 1e-12);
            CHECK(std::abs(v1 - plain) <= 1e-12);
        } catch (const DegenerateError&) {
        }
    }
}

TEST_CASE("no fully rated item leaves the deletion variants undefined") {
    const RatedPopulation pop = make_pop(3, {{3, 1}, {1, 3}, {3, 3}});
    const WeightMatrix id = identity_weights(2);
    CHECK_THROWS_AS(population_kappa_variant(pop, id, Variant::V1), UndefinedCoefficient);
    CHECK_THROWS_AS(population_kappa_variant(pop, id, Variant::V2), UndefinedCoefficient);
}

TEST_CASE("item order never changes a result") {
    std::mt19937_64 g(404);
    std::vector<RatedItem> items;
    for (int i = 0; i < 40; ++i)
        items.push_back({1, 1 + static_cast<int>(g() % 4), 1 + static_cast<int>(g() % 4),
                         DomainTag::None});
    std::vector<RatedItem> shuffled = items;
    std::shuffle(shuffled.begin(), shuffled.end(), g);
    const WeightMatrix w = linear_weights(3);
    const RatedPopulation a(1, 4, std::move(items));
    const RatedPopulation b(1, 4, std::move(shuffled));
    CHECK(population_kappa_variant(a, w, Variant::V1) ==
          population_kappa_variant(b, w, Variant::V1));
    CHECK(population_kappa_variant(a, w, Variant::V2) ==
          population_kappa_variant(b, w, Variant::V2));
    CHECK(population_kappa_variant(a, w, Variant::V3) ==
          population_kappa_variant(b, w, Variant::V3));
}
