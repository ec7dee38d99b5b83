#include "dkappa/weights.hpp"

#include <cmath>
#include <cstdlib>

#include "dkappa/common.hpp"

namespace dkappa {

WeightMatrix::WeightMatrix(int categories, std::vector<double> entries)
    : c_(categories), w_(std::move(entries)) {
    if (c_ < 2) throw InvalidInput("invalid-category-count: need at least 2 categories");
    if (w_.size() != static_cast<std::size_t>(c_) * static_cast<std::size_t>(c_))
        throw InvalidInput("weight matrix must be square of the category count");
    for (int l = 1; l <= c_; ++l) {
        for (int m = 1; m <= c_; ++m) {
            double v = at(l, m);
            if (!(v >= 0.0 && v <= 1.0))
                throw InvalidInput("weight entries must lie in [0,1]");
            if (l == m && v != 1.0)
                throw InvalidInput("weight matrix diagonal must be 1");
            if (at(l, m) != at(m, l))
                throw InvalidInput("weight matrix must be symmetric");
        }
    }
}

WeightMatrix linear_weights(int categories) {
    if (categories < 2) throw InvalidInput("invalid-category-count: need at least 2 categories");
    const int c = categories;
    std::vector<double> w(static_cast<std::size_t>(c) * c);
    for (int l = 0; l < c; ++l)
        for (int m = 0; m < c; ++m)
            w[static_cast<std::size_t>(l) * c + m] =
                1.0 - static_cast<double>(std::abs(l - m)) / static_cast<double>(c - 1);
    return WeightMatrix(c, std::move(w));
}

WeightMatrix identity_weights(int categories) {
    if (categories < 2) throw InvalidInput("invalid-category-count: need at least 2 categories");
    const int c = categories;
    std::vector<double> w(static_cast<std::size_t>(c) * c, 0.0);
    for (int l = 0; l < c; ++l) w[static_cast<std::size_t>(l) * c + l] = 1.0;
    return WeightMatrix(c, std::move(w));
}

WeightMatrix vqr_weights(Exercise exercise) {
    if (exercise == Exercise::Exp1) {
        return WeightMatrix(4, {
            1.0, 0.8, 0.5, 0.0,
            0.8, 1.0, 0.7, 0.2,
            0.5, 0.7, 1.0, 0.5,
            0.0, 0.2, 0.5, 1.0,
        });
    }
    return WeightMatrix(5, {
        1.0, 0.7, 0.4, 0.1, 0.0,
        0.7, 1.0, 0.7, 0.4, 0.3,
        0.4, 0.7, 1.0, 0.7, 0.6,
        0.1, 0.4, 0.7, 1.0, 0.9,
        0.0, 0.3, 0.6, 0.9, 1.0,
    });
}

}  // namespace dkappa
