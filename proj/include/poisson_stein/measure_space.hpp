#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace pstein {

// A finite partition of the control measure: cell c carries mass weight(c).
class DiscreteSpace {
public:
    DiscreteSpace(std::vector<double> weights, bool truncated = false);
    DiscreteSpace(std::vector<double> weights, std::vector<std::vector<double>> labels,
                  bool truncated = false);

    std::size_t size() const noexcept { return weights_.size(); }
    double weight(std::size_t cell) const;
    std::span<const double> weights() const noexcept { return weights_; }
    // Optional coordinate tag, e.g. (u, x) for the Levy product spaces; empty if absent.
    const std::vector<double>& label(std::size_t cell) const;
    bool has_labels() const noexcept { return !labels_.empty(); }
    bool truncated() const noexcept { return truncated_; }
    double total_mass() const noexcept;

    bool same_as(const DiscreteSpace& other) const noexcept;

private:
    std::vector<double> weights_;
    std::vector<std::vector<double>> labels_;
    bool truncated_ = false;
};

using SpacePtr = std::shared_ptr<const DiscreteSpace>;

SpacePtr make_space(std::vector<double> weights, bool truncated = false);

// mu^q of the product cell idx_1 x ... x idx_q.
double product_weight(const DiscreteSpace& space, std::span<const std::size_t> idx);

// m equal cells of weight length/m (Lebesgue measure on [0, length]).
SpacePtr uniform_interval_space(double length, std::size_t m);

}  // namespace pstein
