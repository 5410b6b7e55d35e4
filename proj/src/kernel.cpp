#include "poisson_stein/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "poisson_stein/error.hpp"

namespace pstein {

namespace {

constexpr std::size_t max_entries = std::size_t{1} << 27;

std::size_t checked_pow(std::size_t m, int q) {
    std::size_t n = 1;
    for (int i = 0; i < q; ++i) {
        if (n > max_entries / m)
            fail(errc::unsupported_order, "kernel with " + std::to_string(m) + "^" +
                                              std::to_string(q) + " entries is too large");
        n *= m;
    }
    return n;
}

// Neumaier compensated accumulator.
struct Accumulator {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

// sum over all tuples of prod_j w_{i_j} * term(flat), reducing the last axis first.
template <class Term>
double weighted_total(std::size_t m, int q, std::span<const double> w, std::size_t n, Term term) {
    if (q == 0) return term(0);
    std::vector<double> level(n / m);
    for (std::size_t row = 0; row < n / m; ++row) {
        Accumulator acc;
        for (std::size_t j = 0; j < m; ++j) acc.add(w[j] * term(row * m + j));
        level[row] = acc.value();
    }
    for (int k = 1; k < q; ++k) {
        std::size_t rows = level.size() / m;
        for (std::size_t row = 0; row < rows; ++row) {
            Accumulator acc;
            for (std::size_t j = 0; j < m; ++j) acc.add(w[j] * level[row * m + j]);
            level[row] = acc.value();
        }
        level.resize(rows);
    }
    return level[0];
}

void next_index(std::vector<std::size_t>& idx, std::size_t m) {
    for (std::size_t k = idx.size(); k-- > 0;) {
        if (++idx[k] < m) return;
        idx[k] = 0;
    }
}

}  // namespace

double factorial(int n) {
    if (n < 0) fail(errc::argument, "factorial of a negative number");
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

Kernel::Kernel(SpacePtr space, int order) : space_(std::move(space)), order_(order) {
    if (!space_) fail(errc::argument, "kernel needs a space");
    if (order_ < 0) fail(errc::argument, "kernel order must be nonnegative");
    values_.assign(checked_pow(space_->size(), order_), 0.0);
}

Kernel::Kernel(SpacePtr space, int order, std::vector<double> values)
    : space_(std::move(space)), order_(order), values_(std::move(values)) {
    if (!space_) fail(errc::argument, "kernel needs a space");
    if (order_ < 0) fail(errc::argument, "kernel order must be nonnegative");
    if (values_.size() != checked_pow(space_->size(), order_))
        fail(errc::argument, "kernel value count does not match cells^order");
    for (double v : values_)
        if (!std::isfinite(v)) fail(errc::domain, "kernel values must be finite");
    scan_flags();
}

Kernel Kernel::scalar(SpacePtr space, double value) {
    return Kernel(std::move(space), 0, std::vector<double>{value});
}

void Kernel::scan_flags() {
    symmetric_ = true;
    diagonal_free_ = true;
    if (order_ < 2) return;
    const std::size_t m = space_->size();
    std::vector<std::size_t> stride(order_);
    stride[order_ - 1] = 1;
    for (int k = order_ - 1; k-- > 0;) stride[k] = stride[k + 1] * m;
    double scale = 0.0;
    for (double v : values_) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * scale;

    std::vector<std::size_t> idx(order_, 0);
    for (std::size_t flat = 0; flat < values_.size(); ++flat, next_index(idx, m)) {
        double v = values_[flat];
        if (diagonal_free_ && v != 0.0) {
            std::vector<std::size_t> sorted(idx);
            std::sort(sorted.begin(), sorted.end());
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) diagonal_free_ = false;
        }
        if (symmetric_) {
            for (int k = 0; k + 1 < order_; ++k) {
                if (idx[k] >= idx[k + 1]) continue;
                std::size_t d = idx[k + 1] - idx[k];
                std::size_t other = flat + d * stride[k] - d * stride[k + 1];
                if (std::abs(values_[other] - v) > tol) {
                    symmetric_ = false;
                    break;
                }
            }
        }
        if (!symmetric_ && !diagonal_free_) return;
    }
}

std::size_t Kernel::flat_index(std::span<const std::size_t> idx) const {
    if (idx.size() != static_cast<std::size_t>(order_))
        fail(errc::invalid_index, "index length differs from kernel order");
    const std::size_t m = space_->size();
    std::size_t flat = 0;
    for (std::size_t c : idx) {
        if (c >= m) fail(errc::invalid_index, "cell " + std::to_string(c) + " out of range");
        flat = flat * m + c;
    }
    return flat;
}

double Kernel::at(std::initializer_list<std::size_t> idx) const {
    return (*this)(std::span<const std::size_t>(idx.begin(), idx.size()));
}

double Kernel::scalar_value() const {
    if (order_ != 0) fail(errc::argument, "scalar_value on a kernel of positive order");
    return values_[0];
}

Kernel Kernel::scaled(double c) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= c;
    return Kernel(space_, order_, std::move(v));
}

void require_same_space(const Kernel& f, const Kernel& g) {
    if (!f.space().same_as(g.space())) fail(errc::space_mismatch, "kernels live on different spaces");
}

Kernel contract(const Kernel& f, const Kernel& g, int r, int l) {
    require_same_space(f, g);
    const int p = f.order();
    const int q = g.order();
    if (r < 0 || r > std::min(p, q) || l < 0 || l > r)
        fail(errc::argument, "contraction indices need 0 <= l <= r <= min(p, q)");
    const std::size_t m = f.cells();
    const std::size_t nz = checked_pow(m, l);
    const std::size_t ng = checked_pow(m, r - l);
    const std::size_t nt = checked_pow(m, p - r);
    const std::size_t ns = checked_pow(m, q - r);
    checked_pow(m, p + q - r - l);

    std::vector<double> zw(nz, 1.0);
    {
        std::vector<std::size_t> idx(l, 0);
        for (std::size_t z = 0; z < nz; ++z, next_index(idx, m))
            for (std::size_t c : idx) zw[z] *= f.space().weights()[c];
    }
    // Transpose so the integrated block is contiguous: ft[(gamma, t), z], gt[(gamma, s), z].
    auto fv = f.values();
    auto gv = g.values();
    std::vector<double> ft(ng * nt * nz), gt(ng * ns * nz);
    for (std::size_t z = 0; z < nz; ++z)
        for (std::size_t a = 0; a < ng; ++a) {
            for (std::size_t t = 0; t < nt; ++t) ft[(a * nt + t) * nz + z] = fv[(z * ng + a) * nt + t] * zw[z];
            for (std::size_t s = 0; s < ns; ++s) gt[(a * ns + s) * nz + z] = gv[(z * ng + a) * ns + s];
        }

    std::vector<double> out(ng * nt * ns);
    for (std::size_t a = 0; a < ng; ++a)
        for (std::size_t t = 0; t < nt; ++t) {
            const double* fr = &ft[(a * nt + t) * nz];
            for (std::size_t s = 0; s < ns; ++s) {
                const double* gr = &gt[(a * ns + s) * nz];
                double value;
                if (nz == 1) {
                    value = fr[0] * gr[0];
                } else {
                    Accumulator acc;
                    for (std::size_t z = 0; z < nz; ++z) acc.add(fr[z] * gr[z]);
                    value = acc.value();
                }
                out[(a * nt + t) * ns + s] = value;
            }
        }
    return Kernel(f.space_ptr(), p + q - r - l, std::move(out));
}

Kernel symmetrize(const Kernel& f) {
    const int q = f.order();
    if (q > max_symmetrize_order)
        fail(errc::unsupported_order, "symmetrize supports order <= " + std::to_string(max_symmetrize_order));
    if (q < 2) return f;
    const std::size_t m = f.cells();
    auto v = f.values();
    std::vector<double> out(v.size());
    std::vector<std::size_t> idx(q, 0), perm(q);
    std::vector<std::size_t> flats;
    // Walk nondecreasing tuples; each one names a multiset of cells.
    while (true) {
        perm = idx;
        flats.clear();
        Accumulator acc;
        do {
            std::size_t flat = 0;
            for (std::size_t c : perm) flat = flat * m + c;
            flats.push_back(flat);
            acc.add(v[flat]);
        } while (std::next_permutation(perm.begin(), perm.end()));
        double avg = acc.value() / static_cast<double>(flats.size());
        for (std::size_t flat : flats) out[flat] = avg;

        int k = q - 1;
        while (k >= 0 && idx[k] == m - 1) --k;
        if (k < 0) break;
        ++idx[k];
        for (int j = k + 1; j < q; ++j) idx[j] = idx[k];
    }
    return Kernel(f.space_ptr(), q, std::move(out));
}

double lp_mass(const Kernel& f, double p) {
    if (!(p > 0.0)) fail(errc::argument, "lp_mass needs p > 0");
    auto v = f.values();
    auto term = [&](std::size_t i) {
        double a = std::abs(v[i]);
        if (p == 2.0) return a * a;
        if (p == 3.0) return a * a * a;
        if (p == 4.0) return (a * a) * (a * a);
        return std::pow(a, p);
    };
    return weighted_total(f.cells(), f.order(), f.space().weights(), f.size(), term);
}

double lp_norm(const Kernel& f, double p) { return std::pow(lp_mass(f, p), 1.0 / p); }

double l2_inner(const Kernel& f, const Kernel& g) {
    require_same_space(f, g);
    if (f.order() != g.order()) fail(errc::argument, "inner product of kernels of different order");
    auto a = f.values();
    auto b = g.values();
    return weighted_total(f.cells(), f.order(), f.space().weights(), f.size(),
                          [&](std::size_t i) { return a[i] * b[i]; });
}

Kernel add(const Kernel& f, const Kernel& g) {
    require_same_space(f, g);
    if (f.order() != g.order()) fail(errc::argument, "sum of kernels of different order");
    std::vector<double> v(f.values().begin(), f.values().end());
    auto b = g.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += b[i];
    return Kernel(f.space_ptr(), f.order(), std::move(v));
}

Kernel tensor_power(const Kernel& f, int q) {
    if (f.order() != 1) fail(errc::argument, "tensor_power needs an order-1 kernel");
    if (q < 1) fail(errc::argument, "tensor_power needs q >= 1");
    if (q == 1) return f;
    const std::size_t m = f.cells();
    const std::size_t n = checked_pow(m, q);
    auto fv = f.values();
    std::vector<double> out(n, 0.0);
    std::vector<std::size_t> idx(q, 0), sorted(q);
    for (std::size_t flat = 0; flat < n; ++flat, next_index(idx, m)) {
        sorted = idx;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
        double prod = 1.0;
        for (std::size_t c : idx) prod *= fv[c];
        out[flat] = prod;
    }
    return Kernel(f.space_ptr(), q, std::move(out));
}

Kernel slice(const Kernel& f, std::size_t z) {
    if (f.order() < 1) fail(errc::argument, "cannot slice a scalar kernel");
    if (z >= f.cells()) fail(errc::invalid_index, "slice cell out of range");
    const std::size_t n = f.size() / f.cells();
    auto v = f.values();
    return Kernel(f.space_ptr(), f.order() - 1,
                  std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(z * n),
                                      v.begin() + static_cast<std::ptrdiff_t>((z + 1) * n)));
}

namespace {

void require_symmetric(const Kernel& f, const char* what) {
    if (!f.symmetric()) fail(errc::contract_violation, std::string(what) + " needs a symmetric kernel");
}

void accumulate(std::vector<double>& into, const Kernel& k, double coef) {
    auto v = k.values();
    for (std::size_t i = 0; i < into.size(); ++i) into[i] += coef * v[i];
}

}  // namespace

Kernel G_op(const Kernel& f, int p) {
    require_symmetric(f, "G_op");
    const int q = f.order();
    if (q < 1) fail(errc::argument, "G_op needs order >= 1");
    if (p < 0 || p > 2 * q) fail(errc::argument, "G_op needs 0 <= p <= 2q");
    if (p == 0) return Kernel::scalar(f.space_ptr(), factorial(q) * lp_mass(f, 2));
    std::vector<double> sum(checked_pow(f.cells(), p), 0.0);
    for (int r = 0; r <= q; ++r)
        for (int l = 0; l <= r; ++l) {
            if (2 * q - r - l != p) continue;
            double coef = factorial(r) * binomial(q, r) * binomial(q, r) * binomial(r, l);
            accumulate(sum, symmetrize(contract(f, f, r, l)), coef);
        }
    return Kernel(f.space_ptr(), p, std::move(sum));
}

Kernel G_hat(const Kernel& f, int p) {
    require_symmetric(f, "G_hat");
    const int q = f.order();
    if (q < 2) fail(errc::argument, "G_hat needs order >= 2");
    if (p < 1 || p > 2 * (q - 1)) fail(errc::argument, "G_hat needs 1 <= p <= 2(q-1)");
    std::vector<double> sum(checked_pow(f.cells(), p), 0.0);
    for (int t = 1; t <= q; ++t)
        for (int s = 1; s <= std::min(t, q - 1); ++s) {
            if (2 * q - t - s != p) continue;
            double coef = factorial(t - 1) * binomial(q - 1, t - 1) * binomial(q - 1, t - 1) *
                          binomial(t - 1, s - 1);
            accumulate(sum, symmetrize(contract(f, f, t, s)), coef);
        }
    return Kernel(f.space_ptr(), p, std::move(sum));
}

Kernel G_hat_by_slices(const Kernel& f, int p) {
    require_symmetric(f, "G_hat_by_slices");
    const int q = f.order();
    if (q < 2) fail(errc::argument, "G_hat_by_slices needs order >= 2");
    if (p < 1 || p > 2 * (q - 1)) fail(errc::argument, "G_hat_by_slices needs 1 <= p <= 2(q-1)");
    std::vector<double> sum(checked_pow(f.cells(), p), 0.0);
    for (std::size_t z = 0; z < f.cells(); ++z)
        accumulate(sum, G_op(slice(f, z), p), f.space().weights()[z]);
    return Kernel(f.space_ptr(), p, std::move(sum));
}

std::pair<double, double> verify_useful_identity(const Kernel& f, int p) {
    require_symmetric(f, "verify_useful_identity");
    const int q = f.order();
    if (p < 1 || p > q) fail(errc::argument, "useful identity needs 1 <= p <= q");
    double left = lp_mass(contract(f, f, p, 0), 2);
    double right = lp_mass(contract(f, f, q, q - p), 2);
    return {left, right};
}

TechnicalCondition technical_condition(const Kernel& f) {
    require_symmetric(f, "technical_condition");
    const int q = f.order();
    if (q < 2) fail(errc::argument, "technical_condition needs order >= 2");
    TechnicalCondition tc;
    tc.truncated_space = f.space().truncated();
    for (int p = 0; p <= 2 * (q - 1); ++p) {
        Accumulator acc;
        for (std::size_t z = 0; z < f.cells(); ++z)
            acc.add(f.space().weights()[z] * lp_norm(G_op(slice(f, z), p), 2));
        tc.outer_integrals.push_back(acc.value());
        if (!std::isfinite(acc.value())) tc.satisfied = false;
    }
    return tc;
}

bool assumption_a_holds(const Kernel& f) {
    std::vector<double> a(f.values().begin(), f.values().end());
    for (double& x : a) x = std::abs(x);
    Kernel af(f.space_ptr(), f.order(), std::move(a));
    for (int r = 0; r <= f.order(); ++r)
        for (int l = 0; l <= r; ++l) {
            if (r == 0 && l == 0) continue;
            for (double v : contract(af, af, r, l).values())
                if (!std::isfinite(v)) return false;
        }
    return true;
}

}  // namespace pstein
