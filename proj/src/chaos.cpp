#include "poisson_stein/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "poisson_stein/error.hpp"
#include "poisson_stein/simulator.hpp"

namespace pstein {

namespace {

bool all_zero(const Kernel& k) {
    for (double v : k.values())
        if (v != 0.0) return false;
    return true;
}

void merge_kernel(std::map<int, std::vector<double>>& acc, const Kernel& k, double coef) {
    auto& dst = acc[k.order()];
    if (dst.empty()) dst.assign(k.size(), 0.0);
    auto v = k.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += coef * v[i];
}

ChaosExpansion assemble(const SpacePtr& space, double constant, std::map<int, std::vector<double>>& acc) {
    std::vector<Kernel> kernels;
    for (auto& [n, values] : acc) kernels.emplace_back(space, n, std::move(values));
    return ChaosExpansion(space, constant, std::move(kernels));
}

}  // namespace

ChaosExpansion::ChaosExpansion(SpacePtr space, double constant)
    : space_(std::move(space)), constant_(constant) {
    if (!space_) fail(errc::argument, "chaos expansion needs a space");
    if (!std::isfinite(constant_)) fail(errc::domain, "non-finite constant term");
}

ChaosExpansion::ChaosExpansion(SpacePtr space, double constant, std::vector<Kernel> kernels)
    : ChaosExpansion(std::move(space), constant) {
    for (Kernel& k : kernels) {
        if (!k.space().same_as(*space_)) fail(errc::space_mismatch, "kernel lives on a different space");
        if (k.order() == 0) {
            constant_ += k.scalar_value();
            continue;
        }
        if (k.order() > max_chaos_order)
            fail(errc::unsupported_order, "chaos order " + std::to_string(k.order()) + " exceeds the cap of " +
                                              std::to_string(max_chaos_order));
        Kernel sym = k.symmetric() ? std::move(k) : symmetrize(k);
        auto it = kernels_.find(sym.order());
        if (it == kernels_.end())
            kernels_.emplace(sym.order(), std::move(sym));
        else
            it->second = add(it->second, sym);
    }
    for (auto it = kernels_.begin(); it != kernels_.end();) {
        if (all_zero(it->second))
            it = kernels_.erase(it);
        else
            ++it;
    }
}

ChaosExpansion ChaosExpansion::single(const Kernel& f) {
    return ChaosExpansion(f.space_ptr(), 0.0, {f});
}

const Kernel* ChaosExpansion::kernel(int n) const {
    auto it = kernels_.find(n);
    return it == kernels_.end() ? nullptr : &it->second;
}

int ChaosExpansion::max_order() const noexcept {
    return kernels_.empty() ? 0 : kernels_.rbegin()->first;
}

double ChaosExpansion::variance() const {
    double v = 0.0;
    for (const auto& [n, k] : kernels_) v += factorial(n) * lp_mass(k, 2);
    return v;
}

double ChaosExpansion::second_moment() const { return constant_ * constant_ + variance(); }

double ChaosExpansion::derivative_norm() const {
    double v = 0.0;
    for (const auto& [n, k] : kernels_) v += n * factorial(n) * lp_mass(k, 2);
    return v;
}

ChaosExpansion ChaosExpansion::scaled(double c) const {
    std::vector<Kernel> ks;
    for (const auto& [n, k] : kernels_) ks.push_back(k.scaled(c));
    return ChaosExpansion(space_, c * constant_, std::move(ks));
}

ChaosExpansion add(const ChaosExpansion& F, const ChaosExpansion& G) {
    if (!F.space().same_as(G.space())) fail(errc::space_mismatch, "expansions live on different spaces");
    std::vector<Kernel> ks;
    for (const auto& [n, k] : F.kernels()) ks.push_back(k);
    for (const auto& [n, k] : G.kernels()) ks.push_back(k);
    return ChaosExpansion(F.space_ptr(), F.constant() + G.constant(), std::move(ks));
}

ChaosExpansion multiply(const Kernel& f, const Kernel& g) {
    require_same_space(f, g);
    if (!f.symmetric() || !g.symmetric())
        fail(errc::contract_violation, "product formula needs symmetric kernels");
    const int p = f.order();
    const int q = g.order();
    if (p + q > max_chaos_order)
        fail(errc::unsupported_order, "product order exceeds the chaos cap");
    double constant = 0.0;
    std::map<int, std::vector<double>> acc;
    for (int r = 0; r <= std::min(p, q); ++r)
        for (int l = 0; l <= r; ++l) {
            double coef = factorial(r) * binomial(p, r) * binomial(q, r) * binomial(r, l);
            Kernel c = contract(f, g, r, l);
            if (c.order() == 0)
                constant += coef * c.scalar_value();
            else
                merge_kernel(acc, c, coef);
        }
    return assemble(f.space_ptr(), constant, acc);
}

ChaosExpansion multiply(const ChaosExpansion& F, const ChaosExpansion& G) {
    if (!F.space().same_as(G.space())) fail(errc::space_mismatch, "expansions live on different spaces");
    ChaosExpansion out(F.space_ptr(), F.constant() * G.constant());
    if (G.constant() != 0.0) {
        std::vector<Kernel> ks;
        for (const auto& [n, k] : F.kernels()) ks.push_back(k.scaled(G.constant()));
        out = add(out, ChaosExpansion(F.space_ptr(), 0.0, std::move(ks)));
    }
    if (F.constant() != 0.0) {
        std::vector<Kernel> ks;
        for (const auto& [n, k] : G.kernels()) ks.push_back(k.scaled(F.constant()));
        out = add(out, ChaosExpansion(F.space_ptr(), 0.0, std::move(ks)));
    }
    for (const auto& [n, f] : F.kernels())
        for (const auto& [m, g] : G.kernels()) out = add(out, multiply(f, g));
    return out;
}

KernelFamily apply_D(const ChaosExpansion& F) {
    KernelFamily out{F.space_ptr(), {}};
    const std::size_t m = F.space().size();
    out.at.reserve(m);
    for (std::size_t z = 0; z < m; ++z) {
        double constant = 0.0;
        std::vector<Kernel> ks;
        for (const auto& [n, f] : F.kernels()) {
            if (n == 1)
                constant = f.values()[z];
            else
                ks.push_back(slice(f, z).scaled(static_cast<double>(n)));
        }
        out.at.emplace_back(F.space_ptr(), constant, std::move(ks));
    }
    return out;
}

ChaosExpansion apply_L(const ChaosExpansion& F) {
    std::vector<Kernel> ks;
    for (const auto& [n, f] : F.kernels()) ks.push_back(f.scaled(-static_cast<double>(n)));
    return ChaosExpansion(F.space_ptr(), 0.0, std::move(ks));
}

ChaosExpansion apply_L_inverse(const ChaosExpansion& F) {
    if (std::abs(F.constant()) > 1e-12 * (1.0 + std::sqrt(F.variance())))
        fail(errc::not_centered, "L^{-1} needs a centered functional");
    std::vector<Kernel> ks;
    for (const auto& [n, f] : F.kernels()) ks.push_back(f.scaled(-1.0 / static_cast<double>(n)));
    return ChaosExpansion(F.space_ptr(), 0.0, std::move(ks));
}

ChaosExpansion skorohod(const KernelFamily& u) {
    const std::size_t m = u.space->size();
    if (u.at.size() != m) fail(errc::argument, "kernel family needs one expansion per cell");
    int top = 0;
    for (const auto& e : u.at) {
        if (!e.space().same_as(*u.space)) fail(errc::space_mismatch, "family member on a different space");
        top = std::max(top, e.max_order());
    }
    if (top + 1 > max_chaos_order) fail(errc::unsupported_order, "skorohod output exceeds the chaos cap");
    std::vector<Kernel> ks;
    for (int n = 0; n <= top; ++n) {
        // z occupies the last slot: flat = x_flat * m + z.
        std::size_t inner = 1;
        for (int i = 0; i < n; ++i) inner *= m;
        std::vector<double> values(inner * m, 0.0);
        bool any = false;
        for (std::size_t z = 0; z < m; ++z) {
            if (n == 0) {
                values[z] = u.at[z].constant();
                any = any || values[z] != 0.0;
                continue;
            }
            const Kernel* k = u.at[z].kernel(n);
            if (!k) continue;
            auto v = k->values();
            for (std::size_t x = 0; x < inner; ++x) values[x * m + z] = v[x];
            any = true;
        }
        if (any) ks.emplace_back(u.space, n + 1, std::move(values));
    }
    return ChaosExpansion(u.space, 0.0, std::move(ks));
}

double pathwise_difference(const ChaosExpansion& F, const PoissonSample& sample, std::size_t z) {
    PoissonSample shifted = sample.with_extra_point(z, F.space());
    return evaluate(F, shifted) - evaluate(F, sample);
}

double max_kernel_difference(const ChaosExpansion& F, const ChaosExpansion& G) {
    double d = std::abs(F.constant() - G.constant());
    int top = std::max(F.max_order(), G.max_order());
    for (int n = 1; n <= top; ++n) {
        const Kernel* a = F.kernel(n);
        const Kernel* b = G.kernel(n);
        if (!a && !b) continue;
        std::size_t size = a ? a->size() : b->size();
        for (std::size_t i = 0; i < size; ++i) {
            double x = a ? a->values()[i] : 0.0;
            double y = b ? b->values()[i] : 0.0;
            d = std::max(d, std::abs(x - y));
        }
    }
    return d;
}

}  // namespace pstein
