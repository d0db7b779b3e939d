#pragma once

#include <span>
#include <vector>

namespace bsde {

/// Strictly increasing nodes 0 = t_0 < ... < t_N = T, N >= 1.
class TimeGrid {
public:
    TimeGrid(double horizon, int steps);  // uniform
    explicit TimeGrid(std::vector<double> nodes);

    double horizon() const noexcept { return nodes_.back(); }
    int steps() const noexcept { return static_cast<int>(nodes_.size()) - 1; }
    double operator[](std::size_t i) const { return nodes_[i]; }
    std::span<const double> nodes() const noexcept { return nodes_; }
    double dt(std::size_t i) const { return nodes_[i + 1] - nodes_[i]; }

    /// Each interval split into `factor` equal pieces.
    TimeGrid refined(int factor) const;

private:
    std::vector<double> nodes_;
};

}  // namespace bsde
