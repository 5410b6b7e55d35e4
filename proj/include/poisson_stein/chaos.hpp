#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "poisson_stein/kernel.hpp"

namespace pstein {

inline constexpr int max_chaos_order = 8;

struct PoissonSample;

// F = constant + sum_n I_n(f_n). Kernels are symmetrized on insert; zero
// kernels are dropped. Kernels with nonzero diagonal blocks are allowed: a
// repeated cell contributes through its Charlier polynomial (see simulator).
class ChaosExpansion {
public:
    explicit ChaosExpansion(SpacePtr space, double constant = 0.0);
    ChaosExpansion(SpacePtr space, double constant, std::vector<Kernel> kernels);
    static ChaosExpansion single(const Kernel& f);

    double constant() const noexcept { return constant_; }
    const std::map<int, Kernel>& kernels() const noexcept { return kernels_; }
    const Kernel* kernel(int n) const;
    int max_order() const noexcept;
    const DiscreteSpace& space() const noexcept { return *space_; }
    const SpacePtr& space_ptr() const noexcept { return space_; }

    double variance() const;            // sum n! ||f_n||^2
    double second_moment() const;       // constant^2 + variance
    double derivative_norm() const;     // sum n n! ||f_n||^2

    ChaosExpansion scaled(double c) const;

private:
    SpacePtr space_;
    double constant_ = 0.0;
    std::map<int, Kernel> kernels_;
};

ChaosExpansion add(const ChaosExpansion& F, const ChaosExpansion& G);

// One expansion per cell z, representing u_z.
struct KernelFamily {
    SpacePtr space;
    std::vector<ChaosExpansion> at;
};

// Expansion of I_p(f) I_q(g).
ChaosExpansion multiply(const Kernel& f, const Kernel& g);
// Expansion of F G by bilinearity.
ChaosExpansion multiply(const ChaosExpansion& F, const ChaosExpansion& G);

KernelFamily apply_D(const ChaosExpansion& F);
ChaosExpansion apply_L(const ChaosExpansion& F);
ChaosExpansion apply_L_inverse(const ChaosExpansion& F);
ChaosExpansion skorohod(const KernelFamily& u);

// F(omega + delta_z) - F(omega).
double pathwise_difference(const ChaosExpansion& F, const PoissonSample& sample, std::size_t z);

// Largest absolute entry difference, order by order (constants included).
double max_kernel_difference(const ChaosExpansion& F, const ChaosExpansion& G);

}  // namespace pstein
