#pragma once

#include <array>
#include <span>
#include <vector>

namespace bsde::quad {

/// Composite 5-point Gauss-Legendre rule on `panels` equal panels of [a, b].
template <typename F>
double integrate(F&& f, double a, double b, int panels = 64) {
    static constexpr std::array<double, 5> x{-0.9061798459386640, -0.5384693101056831, 0.0,
                                             0.5384693101056831, 0.9061798459386640};
    static constexpr std::array<double, 5> w{0.2369268850561891, 0.4786286704993665,
                                             0.5688888888888889, 0.4786286704993665,
                                             0.2369268850561891};
    const double h = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        double s = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) s += w[k] * f(mid + 0.5 * h * x[k]);
        sum += 0.5 * h * s;
    }
    return sum;
}

/// Backward cumulative integrals: out[i] = int_{nodes[i]}^{nodes.back()} f.
template <typename F>
std::vector<double> tail_integrals(F&& f, std::span<const double> nodes, int panels_per_interval = 4) {
    std::vector<double> out(nodes.size(), 0.0);
    for (std::size_t i = nodes.size() - 1; i-- > 0;) {
        out[i] = out[i + 1] + integrate(f, nodes[i], nodes[i + 1], panels_per_interval);
    }
    return out;
}

}  // namespace bsde::quad
