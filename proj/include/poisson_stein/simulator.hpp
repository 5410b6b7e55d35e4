#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "poisson_stein/chaos.hpp"
#include "poisson_stein/rng.hpp"

namespace pstein {

struct PoissonSample {
    std::vector<std::int64_t> counts;
    std::vector<double> centered;  // counts + extra multiplicity - weight
    std::vector<std::size_t> extra_points;

    std::int64_t occupancy(std::size_t cell) const;
    PoissonSample with_extra_point(std::size_t z, const DiscreteSpace& space) const;
};

// Independent Poisson(weight) counts; cell c of sample `ordinal` uses stream (seed, ordinal, c).
class SampleGenerator {
public:
    explicit SampleGenerator(SpacePtr space);
    PoissonSample operator()(std::uint64_t seed, std::uint64_t ordinal) const;

private:
    SpacePtr space_;
    std::vector<PoissonSampler> samplers_;
};

PoissonSample sample(const SpacePtr& space, std::uint64_t seed, std::uint64_t ordinal);

// C_k(n, w) = sum_j binom(k, j) n(n-1)...(n-j+1) (-w)^(k-j).
double charlier(int k, double n, double w);

// Sum over every ordered tuple of f(idx) times the product of C_{k_c}(N_c, w_c)
// over the distinct cells c of idx, k_c being the multiplicity of c.
double evaluate(const ChaosExpansion& F, const PoissonSample& s);
// Same value through Moebius inversion over set partitions; orders <= 4.
double evaluate_fast(const ChaosExpansion& F, const PoissonSample& s);
inline constexpr int max_fast_order = 4;

struct SampleStats {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double third = 0.0;     // central, 1/n normalization
    double fourth = 0.0;    // unbiased estimator of the fourth central moment
    double kurtosis = 0.0;  // fourth / variance^2
    double mean_std_error = 0.0;
    double kurtosis_std_error = 0.0;  // batch means over contiguous ordinal blocks
    std::vector<double> sorted_values;
};

SampleStats summarize(std::span<const double> values);

double normal_cdf(double x);
double normal_pdf(double x);
double empirical_w1(std::span<const double> values);

// F evaluated on samples 0..n-1 in ordinal order.
std::vector<double> sample_values(const ChaosExpansion& F, std::size_t n_samples, std::uint64_t seed,
                                  std::size_t threads = 0);
SampleStats run_experiment(const ChaosExpansion& F, std::size_t n_samples, std::uint64_t seed,
                           std::size_t threads = 0);

}  // namespace pstein
