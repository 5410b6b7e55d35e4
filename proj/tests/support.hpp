#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "poisson_stein/chaos.hpp"
#include "poisson_stein/kernel.hpp"
#include "poisson_stein/measure_space.hpp"

namespace oracle {

using pstein::Kernel;
using pstein::SpacePtr;
using Index = std::vector<std::size_t>;

inline SpacePtr random_space(std::mt19937_64& rng, std::size_t m, double lo = 0.2, double hi = 1.5) {
    std::uniform_real_distribution<double> U(lo, hi);
    std::vector<double> w(m);
    for (auto& x : w) x = U(rng);
    return pstein::make_space(std::move(w));
}

inline void for_each_index(std::size_t m, int q, const std::function<void(const Index&)>& body) {
    Index idx(static_cast<std::size_t>(q), 0);
    std::size_t total = 1;
    for (int i = 0; i < q; ++i) total *= m;
    for (std::size_t n = 0; n < total; ++n) {
        body(idx);
        for (int i = q; i-- > 0;) {
            if (++idx[i] < m) break;
            idx[i] = 0;
        }
    }
}

inline double weight_of(const pstein::DiscreteSpace& sp, const Index& idx) {
    double p = 1.0;
    for (auto c : idx) p *= sp.weights()[c];
    return p;
}

// Independent symmetrization by averaging over all q! argument permutations.
inline Kernel symmetrize(const Kernel& f) {
    const int q = f.order();
    std::vector<double> out(f.size(), 0.0);
    std::vector<int> perm(static_cast<std::size_t>(q));
    std::iota(perm.begin(), perm.end(), 0);
    double count = 0.0;
    do {
        count += 1.0;
        for_each_index(f.cells(), q, [&](const Index& idx) {
            Index p(idx.size());
            for (int i = 0; i < q; ++i) p[i] = idx[perm[i]];
            out[f.flat_index(idx)] += f.values()[f.flat_index(p)];
        });
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (auto& v : out) v /= count;
    return Kernel(f.space_ptr(), q, std::move(out));
}

inline Kernel random_kernel(std::mt19937_64& rng, const SpacePtr& sp, int q, bool symmetric = true) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::size_t n = 1;
    for (int i = 0; i < q; ++i) n *= sp->size();
    std::vector<double> v(n);
    for (auto& x : v) x = U(rng);
    Kernel f(sp, q, std::move(v));
    return symmetric ? oracle::symmetrize(f) : f;
}

// Zero out every entry with a repeated index.
inline Kernel zero_diagonals(const Kernel& f) {
    std::vector<double> v(f.values().begin(), f.values().end());
    for_each_index(f.cells(), f.order(), [&](const Index& idx) {
        Index s = idx;
        std::sort(s.begin(), s.end());
        if (std::adjacent_find(s.begin(), s.end()) != s.end()) v[f.flat_index(idx)] = 0.0;
    });
    return Kernel(f.space_ptr(), f.order(), std::move(v));
}

// f *_r^l g by brute force: output (gamma, t, s), f read as (z, gamma, t), g as (z, gamma, s).
inline Kernel contract(const Kernel& f, const Kernel& g, int r, int l) {
    const int p = f.order(), q = g.order();
    const int out_order = p + q - r - l;
    const auto& sp = f.space();
    std::vector<double> out;
    std::size_t total = 1;
    for (int i = 0; i < out_order; ++i) total *= f.cells();
    out.assign(total, 0.0);
    for_each_index(f.cells(), out_order, [&](const Index& o) {
        Index gam(o.begin(), o.begin() + (r - l));
        Index t(o.begin() + (r - l), o.begin() + (r - l) + (p - r));
        Index s(o.begin() + (r - l) + (p - r), o.end());
        double acc = 0.0;
        for_each_index(f.cells(), l, [&](const Index& z) {
            Index fi = z, gi = z;
            fi.insert(fi.end(), gam.begin(), gam.end());
            fi.insert(fi.end(), t.begin(), t.end());
            gi.insert(gi.end(), gam.begin(), gam.end());
            gi.insert(gi.end(), s.begin(), s.end());
            acc += f(fi) * g(gi) * weight_of(sp, z);
        });
        std::size_t flat = 0;
        for (auto c : o) flat = flat * f.cells() + c;
        out[flat] = acc;
    });
    return Kernel(f.space_ptr(), out_order, std::move(out));
}

inline double mass(const Kernel& f, double p) {
    double s = 0.0;
    for_each_index(f.cells(), f.order(), [&](const Index& idx) {
        s += std::pow(std::abs(f(idx)), p) * weight_of(f.space(), idx);
    });
    return s;
}

inline double max_abs_diff(const Kernel& a, const Kernel& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
    return d;
}

inline double max_abs(const Kernel& a) {
    double d = 0.0;
    for (double v : a.values()) d = std::max(d, std::abs(v));
    return d;
}

// I_q(f) for a diagonal-free kernel: sum over tuples of distinct cells of
// f times the product of centered counts.
inline double distinct_tuple_integral(const Kernel& f, const std::vector<double>& centered) {
    double s = 0.0;
    for_each_index(f.cells(), f.order(), [&](const Index& idx) {
        Index srt = idx;
        std::sort(srt.begin(), srt.end());
        if (std::adjacent_find(srt.begin(), srt.end()) != srt.end()) return;
        double prod = f(idx);
        for (auto c : idx) prod *= centered[c];
        s += prod;
    });
    return s;
}

}  // namespace oracle
