#include "poisson_stein/measure_space.hpp"

#include <cmath>
#include <string>

#include "poisson_stein/error.hpp"

namespace pstein {

DiscreteSpace::DiscreteSpace(std::vector<double> weights, bool truncated)
    : DiscreteSpace(std::move(weights), {}, truncated) {}

DiscreteSpace::DiscreteSpace(std::vector<double> weights, std::vector<std::vector<double>> labels,
                             bool truncated)
    : weights_(std::move(weights)), labels_(std::move(labels)), truncated_(truncated) {
    if (weights_.empty()) fail(errc::argument, "space needs at least one cell");
    for (std::size_t c = 0; c < weights_.size(); ++c) {
        double w = weights_[c];
        if (!(w > 0.0) || !std::isfinite(w))
            fail(errc::argument, "cell " + std::to_string(c) + " has non-positive or non-finite weight");
    }
    if (!labels_.empty() && labels_.size() != weights_.size())
        fail(errc::argument, "label count differs from cell count");
}

double DiscreteSpace::weight(std::size_t cell) const {
    if (cell >= weights_.size())
        fail(errc::invalid_index, "cell " + std::to_string(cell) + " out of range");
    return weights_[cell];
}

const std::vector<double>& DiscreteSpace::label(std::size_t cell) const {
    static const std::vector<double> empty;
    if (cell >= weights_.size())
        fail(errc::invalid_index, "cell " + std::to_string(cell) + " out of range");
    return labels_.empty() ? empty : labels_[cell];
}

double DiscreteSpace::total_mass() const noexcept {
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
}

bool DiscreteSpace::same_as(const DiscreteSpace& other) const noexcept {
    return this == &other || weights_ == other.weights_;
}

SpacePtr make_space(std::vector<double> weights, bool truncated) {
    return std::make_shared<const DiscreteSpace>(std::move(weights), truncated);
}

double product_weight(const DiscreteSpace& space, std::span<const std::size_t> idx) {
    double p = 1.0;
    for (std::size_t c : idx) p *= space.weight(c);
    return p;
}

SpacePtr uniform_interval_space(double length, std::size_t m) {
    if (m == 0) fail(errc::argument, "uniform_interval_space needs m >= 1");
    if (!(length > 0.0)) fail(errc::argument, "uniform_interval_space needs positive length");
    return make_space(std::vector<double>(m, length / static_cast<double>(m)));
}

}  // namespace pstein
