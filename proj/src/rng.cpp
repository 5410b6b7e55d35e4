#include "poisson_stein/rng.hpp"

#include <cmath>
#include <numbers>

namespace pstein {

namespace {

constexpr std::uint32_t philox_m0 = 0xD2511F53u;
constexpr std::uint32_t philox_m1 = 0xCD9E8D57u;
constexpr std::uint32_t philox_w0 = 0x9E3779B9u;
constexpr std::uint32_t philox_w1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += philox_w0;
            key[1] += philox_w1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(philox_m0, ctr[0], hi0, lo0);
        mulhilo(philox_m1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

CounterStream::CounterStream(std::uint64_t seed, std::uint64_t ordinal, std::uint32_t lane)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{static_cast<std::uint32_t>(ordinal), static_cast<std::uint32_t>(ordinal >> 32), lane, 0u} {}

void CounterStream::refill() {
    buffer_ = philox4x32(counter_, key_);
    ++counter_[3];
    used_ = 0;
}

double CounterStream::uniform() {
    if (used_ >= 4) refill();
    std::uint64_t hi = buffer_[used_] >> 5;  // 27 bits
    std::uint64_t lo = buffer_[used_ + 1] >> 6;  // 26 bits
    used_ += 2;
    std::uint64_t bits = (hi << 26) | lo;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double CounterStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_normal_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

PoissonSampler::PoissonSampler(double mean) : mean_(mean) {
    if (!(mean_ > 0.0)) return;
    if (mean_ < 10.0) {
        exp_neg_mean_ = std::exp(-mean_);
        return;
    }
    slam_ = std::sqrt(mean_);
    loglam_ = std::log(mean_);
    b_ = 0.931 + 2.53 * slam_;
    a_ = -0.059 + 0.02483 * b_;
    invalpha_ = 1.1239 + 1.1328 / (b_ - 3.4);
    vr_ = 0.9277 - 3.6224 / (b_ - 2.0);
}

std::int64_t PoissonSampler::operator()(CounterStream& stream) const {
    if (!(mean_ > 0.0)) return 0;
    if (mean_ < 10.0) {
        double u = stream.uniform();
        double p = exp_neg_mean_;
        double cdf = p;
        std::int64_t k = 0;
        while (u > cdf) {
            ++k;
            p *= mean_ / static_cast<double>(k);
            if (p == 0.0) break;
            cdf += p;
        }
        return k;
    }
    // Hormann (1993), PTRS.
    while (true) {
        double U = stream.uniform() - 0.5;
        double V = stream.uniform();
        double us = 0.5 - std::abs(U);
        auto k = static_cast<std::int64_t>(std::floor((2.0 * a_ / us + b_) * U + mean_ + 0.43));
        if (us >= 0.07 && V <= vr_) return k;
        if (k < 0 || (us < 0.013 && V > us)) continue;
        double lhs = std::log(V) + std::log(invalpha_) - std::log(a_ / (us * us) + b_);
        double rhs = -mean_ + static_cast<double>(k) * loglam_ - std::lgamma(static_cast<double>(k) + 1.0);
        if (lhs <= rhs) return k;
    }
}

std::int64_t poisson(CounterStream& stream, double mean) { return PoissonSampler(mean)(stream); }

}  // namespace pstein
