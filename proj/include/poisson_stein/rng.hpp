#pragma once

#include <array>
#include <cstdint>

namespace pstein {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32-10 block function (Salmon et al., Random123).
PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

// Uniform stream addressed by (seed, ordinal, lane); draws are a pure function
// of the address and the draw position, so parallel consumers never interact.
class CounterStream {
public:
    CounterStream(std::uint64_t seed, std::uint64_t ordinal, std::uint32_t lane);

    double uniform();  // in (0, 1)
    double normal();   // Box-Muller

private:
    void refill();

    PhiloxKey key_;
    PhiloxCounter counter_;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

// Poisson(mean): inversion by sequential search for mean < 10, PTRS
// transformed rejection otherwise. Constants are prepared once per mean.
class PoissonSampler {
public:
    explicit PoissonSampler(double mean);
    std::int64_t operator()(CounterStream& stream) const;
    double mean() const noexcept { return mean_; }

private:
    double mean_;
    double exp_neg_mean_ = 0.0;
    double slam_ = 0.0, loglam_ = 0.0, b_ = 0.0, a_ = 0.0, invalpha_ = 0.0, vr_ = 0.0;
};

std::int64_t poisson(CounterStream& stream, double mean);

// Stream labels so that different consumers of one seed never share draws.
namespace lane {
inline constexpr std::uint32_t normal_draws = 0xFFFF0001u;
}

}  // namespace pstein
