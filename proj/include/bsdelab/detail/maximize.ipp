#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace bsde::env {

template <typename F>
Maximum maximize_1d(F&& f, double lo, double hi, const EnvelopeGrid& grid,
                    std::span<const double> anchors) {
    Maximum best{lo, -std::numeric_limits<double>::infinity()};
    auto consider = [&](double x) {
        const double v = f(x);
        if (v > best.value) best = {x, v};
    };
    for (double a : anchors) {
        if (a >= lo && a <= hi) consider(a);
    }
    if (!(hi > lo)) {
        consider(lo);
        return best;
    }

    double a = lo, b = hi;
    const int m = grid.nodes;
    for (int pass = 0; pass < std::max(1, grid.passes); ++pass) {
        const double h = (b - a) / (m - 1);
        for (int i = 0; i < m; ++i) consider(i == m - 1 ? b : a + h * i);
        a = std::max(lo, best.arg - h);
        b = std::min(hi, best.arg + h);
        if (!(b > a)) break;
    }

    // Golden-section polish inside the last bracket.
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 200 && (b - a) > 1e-15 * (1.0 + std::fabs(a) + std::fabs(b)); ++it) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    if (f1 > best.value) best = {x1, f1};
    if (f2 > best.value) best = {x2, f2};
    return best;
}

}  // namespace bsde::env
