#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "poisson_stein/measure_space.hpp"

namespace pstein {

inline constexpr int max_symmetrize_order = 8;

double factorial(int n);
double binomial(int n, int k);

// Dense order-q tensor over cells^q, row-major with the last index fastest.
// Values never change after construction; the symmetric and diagonal_free
// flags are computed from the values by a full scan.
class Kernel {
public:
    Kernel(SpacePtr space, int order);  // zero kernel
    Kernel(SpacePtr space, int order, std::vector<double> values);
    static Kernel scalar(SpacePtr space, double value);

    int order() const noexcept { return order_; }
    std::size_t cells() const noexcept { return space_->size(); }
    std::size_t size() const noexcept { return values_.size(); }
    const DiscreteSpace& space() const noexcept { return *space_; }
    const SpacePtr& space_ptr() const noexcept { return space_; }
    std::span<const double> values() const noexcept { return values_; }
    bool symmetric() const noexcept { return symmetric_; }
    bool diagonal_free() const noexcept { return diagonal_free_; }

    std::size_t flat_index(std::span<const std::size_t> idx) const;
    double operator()(std::span<const std::size_t> idx) const { return values_[flat_index(idx)]; }
    double at(std::initializer_list<std::size_t> idx) const;
    double scalar_value() const;

    Kernel scaled(double c) const;

private:
    void scan_flags();

    SpacePtr space_;
    int order_ = 0;
    std::vector<double> values_;
    bool symmetric_ = true;
    bool diagonal_free_ = true;
};

void require_same_space(const Kernel& f, const Kernel& g);

// f *_r^l g: r variables identified, l of them integrated against mu.
// Output variables are (gamma_1..gamma_{r-l}, t_1..t_{p-r}, s_1..s_{q-r}).
Kernel contract(const Kernel& f, const Kernel& g, int r, int l);
Kernel symmetrize(const Kernel& f);

double lp_mass(const Kernel& f, double p);  // sum |f|^p * product weights
double lp_norm(const Kernel& f, double p);
double l2_inner(const Kernel& f, const Kernel& g);

Kernel add(const Kernel& f, const Kernel& g);

// Diagonal-zeroed q-fold tensor power of an order-1 kernel.
Kernel tensor_power(const Kernel& f, int q);

// f(z, .) as a kernel of order q-1.
Kernel slice(const Kernel& f, std::size_t z);

Kernel G_op(const Kernel& f, int p);
Kernel G_hat(const Kernel& f, int p);
// The same operator through its definition, sum_z w_z G_p^{q-1} f(z, .).
Kernel G_hat_by_slices(const Kernel& f, int p);

// (||f *_p^0 f||^2, ||f *_q^{q-p} f||^2)
std::pair<double, double> verify_useful_identity(const Kernel& f, int p);

// Outer integrals sum_z w_z ||G_p^{q-1} f(z, .)|| for p = 0..2(q-1). Always
// finite on a finite space; on a truncated space they describe only the window.
struct TechnicalCondition {
    std::vector<double> outer_integrals;
    bool satisfied = true;
    bool truncated_space = false;
};
TechnicalCondition technical_condition(const Kernel& f);

// Finiteness of |f| *_r^l |f| for all admissible (r, l).
bool assumption_a_holds(const Kernel& f);

}  // namespace pstein
