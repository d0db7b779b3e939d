#pragma once

// Independent reference computations. None of these call into the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace oracle {

inline double normal_pdf(double x, double sd) {
    constexpr double inv_sqrt_2pi = 0.39894228040143267794;
    return inv_sqrt_2pi / sd * std::exp(-0.5 * (x / sd) * (x / sd));
}

/// E[f(B_T)] by composite Simpson over [-12 sd, 12 sd].
inline double gaussian_expectation(const std::function<double(double)>& f, double horizon = 1.0,
                                   int intervals = 200000) {
    const double sd = std::sqrt(horizon);
    const double a = -12.0 * sd, b = 12.0 * sd;
    const double h = (b - a) / intervals;
    double sum = 0.0;
    for (int i = 0; i <= intervals; ++i) {
        const double x = a + i * h;
        const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        sum += w * f(x) * normal_pdf(x, sd);
    }
    return sum * h / 3.0;
}

/// max of f over [lo, hi] by a uniform scan of `nodes` points plus the anchors.
inline double dense_max(const std::function<double(double)>& f, double lo, double hi, int nodes,
                        std::initializer_list<double> anchors = {}) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < nodes; ++i) best = std::max(best, f(lo + (hi - lo) * i / (nodes - 1)));
    for (double a : anchors)
        if (a >= lo && a <= hi) best = std::max(best, f(a));
    return best;
}

/// Local golden-section polish of a dense scan; used where the scan alone
/// cannot reach 1e-6 relative accuracy.
inline double dense_max_polished(const std::function<double(double)>& f, double lo, double hi, int nodes,
                                 std::initializer_list<double> anchors = {}) {
    double best = -std::numeric_limits<double>::infinity(), arg = lo;
    const double h = (hi - lo) / (nodes - 1);
    for (int i = 0; i < nodes; ++i) {
        const double x = lo + h * i;
        const double v = f(x);
        if (v > best) best = v, arg = x;
    }
    for (double a : anchors)
        if (a >= lo && a <= hi && f(a) > best) best = f(a), arg = a;
    double a = std::max(lo, arg - h), b = std::min(hi, arg + h);
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int k = 0; k < 100; ++k) {
        if (fc > fd) {
            b = d, d = c, fd = fc;
            c = b - r * (b - a), fc = f(c);
        } else {
            a = c, c = d, fc = fd;
            d = a + r * (b - a), fd = f(d);
        }
    }
    return std::max({best, fc, fd});
}

}  // namespace oracle
