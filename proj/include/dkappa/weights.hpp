#pragma once

#include <vector>

namespace dkappa {

enum class Exercise { Exp1, Exp2 };

// Square matrix of agreement weights over rating categories 1..c.
// Invariants enforced on construction: unit diagonal, symmetry, entries in
// [0,1]. Categories are 1-based throughout the library.
class WeightMatrix {
public:
    WeightMatrix(int categories, std::vector<double> entries);

    int categories() const { return c_; }
    double at(int l, int m) const { return w_[(l - 1) * c_ + (m - 1)]; }

private:
    int c_;
    std::vector<double> w_;
};

// w_lm = 1 - |l - m| / (c - 1), kept at full precision.
WeightMatrix linear_weights(int categories);

// w_lm = 1 if l == m else 0 (unweighted kappa).
WeightMatrix identity_weights(int categories);

// The assessment agency's bespoke weights: 4x4 for the first exercise,
// 5x5 for the second. Entries are verbatim.
WeightMatrix vqr_weights(Exercise exercise);

}  // namespace dkappa
