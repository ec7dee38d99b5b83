#pragma once

// Shared helpers for the test suites: independent brute-force oracles for the
// agreement coefficients and a chi-square tail probability for goodness-of-fit
// checks. Everything here is deliberately written against the raw formulas,
// not the library's shared computation paths.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "dkappa/population.hpp"
#include "dkappa/weights.hpp"

namespace testsupport {

struct Pair {
    int u;
    int v;
};

// Plain weighted kappa by direct counting over all c categories.
inline double naive_kappa(const std::vector<Pair>& items, int c, const dkappa::WeightMatrix& w) {
    const double n = static_cast<double>(items.size());
    std::vector<double> cell(static_cast<std::size_t>(c) * c, 0.0);
    std::vector<double> ru(static_cast<std::size_t>(c), 0.0), rv(static_cast<std::size_t>(c), 0.0);
    for (const Pair& p : items) {
        cell[static_cast<std::size_t>(p.u - 1) * c + (p.v - 1)] += 1.0 / n;
        ru[static_cast<std::size_t>(p.u - 1)] += 1.0 / n;
        rv[static_cast<std::size_t>(p.v - 1)] += 1.0 / n;
    }
    double po = 0.0, pe = 0.0;
    for (int l = 1; l <= c; ++l)
        for (int m = 1; m <= c; ++m) {
            po += w.at(l, m) * cell[static_cast<std::size_t>(l - 1) * c + (m - 1)];
            pe += w.at(l, m) * ru[static_cast<std::size_t>(l - 1)] * rv[static_cast<std::size_t>(m - 1)];
        }
    if (!(1.0 - pe > 0.0)) throw std::runtime_error("oracle: degenerate marginals");
    return (po - pe) / (1.0 - pe);
}

// Listwise-deletion route: drop items with a sentinel rating, then plain
// kappa on the remaining c-1 categories.
inline double deletion_kappa(const std::vector<Pair>& items, int c,
                             const dkappa::WeightMatrix& w) {
    std::vector<Pair> kept;
    for (const Pair& p : items)
        if (p.u < c && p.v < c) kept.push_back(p);
    if (kept.empty()) throw std::runtime_error("oracle: no fully rated items");
    return naive_kappa(kept, c - 1, w);
}

// Gwet-style route evaluated directly from its definition.
inline double naive_v2(const std::vector<Pair>& items, int c, const dkappa::WeightMatrix& w) {
    const double n = static_cast<double>(items.size());
    std::vector<double> cell(static_cast<std::size_t>(c) * c, 0.0);
    std::vector<double> ru(static_cast<std::size_t>(c), 0.0), rv(static_cast<std::size_t>(c), 0.0);
    for (const Pair& p : items) {
        cell[static_cast<std::size_t>(p.u - 1) * c + (p.v - 1)] += 1.0 / n;
        ru[static_cast<std::size_t>(p.u - 1)] += 1.0 / n;
        rv[static_cast<std::size_t>(p.v - 1)] += 1.0 / n;
    }
    double mass = 0.0, po_num = 0.0, pe_num = 0.0;
    for (int l = 1; l < c; ++l)
        for (int m = 1; m < c; ++m) {
            mass += cell[static_cast<std::size_t>(l - 1) * c + (m - 1)];
            po_num += w.at(l, m) * cell[static_cast<std::size_t>(l - 1) * c + (m - 1)];
            pe_num += w.at(l, m) * ru[static_cast<std::size_t>(l - 1)] *
                      rv[static_cast<std::size_t>(m - 1)];
        }
    if (!(mass > 0.0)) throw std::runtime_error("oracle: no fully rated items");
    const double po = po_num / mass;
    const double pe = pe_num / ((1.0 - ru[static_cast<std::size_t>(c - 1)]) *
                                (1.0 - rv[static_cast<std::size_t>(c - 1)]));
    if (!(1.0 - pe > 0.0)) throw std::runtime_error("oracle: degenerate marginals");
    return (po - pe) / (1.0 - pe);
}

// Null-weight route evaluated directly from its definition.
inline double naive_v3(const std::vector<Pair>& items, int c, const dkappa::WeightMatrix& w) {
    const double n = static_cast<double>(items.size());
    std::vector<double> cell(static_cast<std::size_t>(c) * c, 0.0);
    std::vector<double> ru(static_cast<std::size_t>(c), 0.0), rv(static_cast<std::size_t>(c), 0.0);
    for (const Pair& p : items) {
        cell[static_cast<std::size_t>(p.u - 1) * c + (p.v - 1)] += 1.0 / n;
        ru[static_cast<std::size_t>(p.u - 1)] += 1.0 / n;
        rv[static_cast<std::size_t>(p.v - 1)] += 1.0 / n;
    }
    double po = 0.0, pe = 0.0;
    for (int l = 1; l < c; ++l)
        for (int m = 1; m < c; ++m) {
            po += w.at(l, m) * cell[static_cast<std::size_t>(l - 1) * c + (m - 1)];
            pe += w.at(l, m) * ru[static_cast<std::size_t>(l - 1)] *
                  rv[static_cast<std::size_t>(m - 1)];
        }
    if (!(1.0 - pe > 0.0)) throw std::runtime_error("oracle: degenerate marginals");
    return (po - pe) / (1.0 - pe);
}

// Random symmetric weight matrix with unit diagonal.
inline dkappa::WeightMatrix random_weights(std::mt19937_64& g, int c) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> w(static_cast<std::size_t>(c) * c, 1.0);
    for (int l = 0; l < c; ++l)
        for (int m = l + 1; m < c; ++m) {
            const double v = unit(g);
            w[static_cast<std::size_t>(l) * c + m] = v;
            w[static_cast<std::size_t>(m) * c + l] = v;
        }
    return dkappa::WeightMatrix(c, std::move(w));
}

// Regularized upper incomplete gamma Q(a, x), series + continued fraction.
inline double gammq(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gammq domain");
    if (x == 0.0) return 1.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, del = 1.0 / a, sum = del;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
    }
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::fabs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

inline double chi2_sf(double x, double df) { return gammq(df / 2.0, x / 2.0); }

}  // namespace testsupport
