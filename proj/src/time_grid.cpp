#include "bsdelab/time_grid.hpp"

#include <cmath>

#include "bsdelab/errors.hpp"

namespace bsde {

TimeGrid::TimeGrid(double horizon, int steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw InvalidArgument("time horizon must be finite and positive");
    }
    if (steps < 1) throw InvalidArgument("time grid needs at least one step");
    nodes_.resize(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i) nodes_[static_cast<std::size_t>(i)] = horizon * i / steps;
    nodes_.back() = horizon;
}

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) throw InvalidArgument("time grid needs at least one step");
    if (nodes_.front() != 0.0) throw InvalidArgument("time grid must start at 0");
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (!(nodes_[i] > nodes_[i - 1])) throw InvalidArgument("time grid must be strictly increasing");
    }
    if (!std::isfinite(nodes_.back())) throw InvalidArgument("time horizon must be finite");
}

TimeGrid TimeGrid::refined(int factor) const {
    if (factor < 1) throw InvalidArgument("refinement factor must be >= 1");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(steps()) * static_cast<std::size_t>(factor) + 1);
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        for (int k = 0; k < factor; ++k) {
            out.push_back(nodes_[i] + (nodes_[i + 1] - nodes_[i]) * k / factor);
        }
    }
    out.push_back(nodes_.back());
    return TimeGrid(std::move(out));
}

}  // namespace bsde
