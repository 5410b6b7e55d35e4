#include "poisson_stein/stein_bounds.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

#include "poisson_stein/error.hpp"
#include "poisson_stein/parallel.hpp"
#include "poisson_stein/simulator.hpp"

namespace pstein {

const char* to_string(BoundMethod m) {
    return m == BoundMethod::closed_form ? "closed_form" : "monte_carlo";
}

double BoundReport::value(const std::string& label) const {
    for (const auto& it : items)
        if (it.label == label) return it.value;
    for (const auto& it : diagnostics)
        if (it.label == label) return it.value;
    fail(errc::argument, "bound report has no entry '" + label + "'");
}

bool BoundReport::has(const std::string& label) const {
    for (const auto& it : items)
        if (it.label == label) return true;
    for (const auto& it : diagnostics)
        if (it.label == label) return true;
    return false;
}

void BoundReport::add_item(std::string label, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail(errc::domain, "bound item '" + label + "' is not a finite nonnegative value");
    items.push_back({std::move(label), v});
}

void BoundReport::add_diagnostic(std::string label, double v) { diagnostics.push_back({std::move(label), v}); }

void BoundReport::finalize() {
    total = 0.0;
    for (const auto& it : items) total += it.value;
}

std::string kernel_digest(const std::vector<const Kernel*>& kernels) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&](const void* data, std::size_t n) {
        auto p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ull;
        }
    };
    for (const Kernel* k : kernels) {
        int order = k->order();
        std::uint64_t m = k->cells();
        mix(&order, sizeof order);
        mix(&m, sizeof m);
        mix(k->space().weights().data(), m * sizeof(double));
        mix(k->values().data(), k->size() * sizeof(double));
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

BoundReport bound_first_chaos(const Kernel& h) {
    if (h.order() != 1) fail(errc::argument, "first-chaos bound needs an order-1 kernel");
    BoundReport r;
    double norm_sq = lp_mass(h, 2);
    r.add_item("1stChUB.var_defect", std::abs(1.0 - norm_sq));
    r.add_item("1stChUB.cubic", lp_mass(h, 3));
    r.add_diagnostic("1stChUB.norm_sq", norm_sq);
    r.inputs_digest = kernel_digest({&h});
    r.finalize();
    return r;
}

FixedChaosMode parse_fixed_chaos_mode(const std::string& s) {
    if (s == "exact_G" || s == "exact-G" || s == "exact") return FixedChaosMode::exact_G;
    if (s == "contraction_estimate" || s == "contraction-estimate" || s == "estimate")
        return FixedChaosMode::contraction_estimate;
    fail(errc::argument, "unknown bound mode '" + s + "'");
}

namespace {

std::string star_label(int r, int l) {
    return "star" + std::to_string(r) + std::to_string(l);
}

std::string chain_prefix(int q) {
    if (q == 2) return "doubleEX";
    if (q == 3) return "ZZ";
    return "starestimate";
}

void add_coef(std::map<std::pair<int, int>, double>& c, std::pair<int, int> key, double v) { c[key] += v; }

// Term-1 chain (without the outer factor q).
std::map<std::pair<int, int>, double> chain1(int q) {
    std::map<std::pair<int, int>, double> c;
    for (int t = 1; t <= q; ++t)
        for (int s = 1; s <= std::min(t, q - 1); ++s) {
            if (t + s < 2 || t + s > 2 * q - 1) continue;
            double k = std::sqrt(factorial(2 * q - t - s)) * std::sqrt(factorial(t - 1)) * binomial(q - 1, t - 1) *
                       std::sqrt(binomial(t - 1, s - 1));
            add_coef(c, {t, s}, k);
        }
    return c;
}

// Term-2 chain (without the multiplier), a = 0 norms rewritten.
std::map<std::pair<int, int>, double> chain2(int q) {
    std::map<std::pair<int, int>, double> c;
    for (int b = 1; b <= q; ++b)
        for (int a = 0; a <= b - 1; ++a) {
            if (a + b < 1 || a + b > 2 * q - 1) continue;
            double k = std::sqrt(factorial(a + b)) * std::sqrt(factorial(q - a - 1)) * binomial(q - 1, q - 1 - a) *
                       std::sqrt(binomial(q - 1 - a, q - b));
            std::pair<int, int> key = a > 0 ? std::pair{b, a} : (b < q ? std::pair{q, q - b} : std::pair{q, 0});
            add_coef(c, key, k);
        }
    return c;
}

double contraction_norm(const Kernel& f, std::pair<int, int> key) {
    if (key.second == 0) return std::sqrt(lp_mass(f, 4));
    return lp_norm(contract(f, f, key.first, key.second), 2);
}

std::string key_label(std::pair<int, int> key) {
    return key.second == 0 ? std::string("l4") : star_label(key.first, key.second);
}

}  // namespace

std::map<std::pair<int, int>, double> estimate_chain_coefficients(int q, double multiplier) {
    std::map<std::pair<int, int>, double> out;
    for (auto [k, v] : chain1(q)) out[k] += q * v;
    for (auto [k, v] : chain2(q)) out[k] += multiplier * v;
    return out;
}

std::map<std::pair<int, int>, double> printed_triple_coefficients() {
    const double s18 = std::sqrt(18.0), s24 = std::sqrt(24.0);
    return {
        {{1, 1}, 3.0 * s24},
        {{2, 1}, (6.0 + 2.0 * s18) * std::sqrt(6.0)},
        {{2, 2}, 6.0 * std::sqrt(2.0)},
        {{3, 1}, 6.0 + s18 * (4.0 + 2.0 * s24)},
        {{3, 2}, s18 * (std::sqrt(2.0) + std::sqrt(120.0)) + 6.0},
        {{3, 0}, std::pow(3.0, 1.5) * s18},
    };
}

BoundReport bound_fixed_chaos(const Kernel& f, FixedChaosMode mode) {
    const int q = f.order();
    if (q < 2) fail(errc::argument, "fixed-chaos bound needs order >= 2");
    if (!f.symmetric()) fail(errc::contract_violation, "fixed-chaos bound needs a symmetric kernel");
    BoundReport r;
    r.inputs_digest = kernel_digest({&f});
    const double norm_sq = lp_mass(f, 2);
    const double var_defect = std::abs(1.0 - factorial(q) * norm_sq);
    r.add_diagnostic("variance", factorial(q) * norm_sq);

    if (mode == FixedChaosMode::exact_G) {
        if (q > 4) fail(errc::unsupported_order, "exact_G path supports q <= 4");
        double ghat = 0.0;
        for (int p = 1; p <= 2 * (q - 1); ++p) {
            double mass = lp_mass(G_hat(f, p), 2);
            r.add_diagnostic("bound_on_int.Ghat_mass_p" + std::to_string(p), mass);
            ghat += factorial(p) * mass;
        }
        double slices = 0.0;
        for (int p = 0; p <= 2 * (q - 1); ++p) {
            double mass = 0.0;
            for (std::size_t z = 0; z < f.cells(); ++z)
                mass += f.space().weights()[z] * lp_mass(G_op(slice(f, z), p), 2);
            r.add_diagnostic("bound_on_int_cont.slice_mass_p" + std::to_string(p), mass);
            slices += factorial(p) * mass;
        }
        r.add_diagnostic("bound_on_int.var_defect", var_defect);
        r.add_item("bound_on_int", std::sqrt(var_defect * var_defect + q * q * ghat));
        r.add_item("bound_on_int_cont", q * q * std::sqrt(factorial(q - 1) * norm_sq) * std::sqrt(slices));
        r.finalize();
        return r;
    }

    const std::string prefix = chain_prefix(q);
    const double multiplier = q * q * std::sqrt(factorial(q - 1) * norm_sq);
    auto c1 = chain1(q);
    auto c2 = chain2(q);
    std::map<std::pair<int, int>, double> norms;
    for (auto& [k, v] : c1) norms[k] = 0.0;
    for (auto& [k, v] : c2) norms[k] = 0.0;
    for (auto& [k, v] : norms) {
        v = contraction_norm(f, k);
        r.add_diagnostic("norm." + key_label(k), v);
    }
    double s1 = 0.0, s2 = 0.0;
    for (auto& [k, v] : c1) s1 += v * norms[k];
    for (auto& [k, v] : c2) s2 += v * norms[k];
    r.add_diagnostic("starestimate1b", q * s1);
    r.add_diagnostic("starestimate2b", s2);
    r.add_diagnostic("starestimate.multiplier", multiplier);

    r.add_item(prefix + ".var_defect", var_defect);
    for (auto& [k, coef] : estimate_chain_coefficients(q, multiplier))
        r.add_item(prefix + "." + key_label(k), coef * norms[k]);

    if (q == 3) {
        double printed = var_defect;
        for (auto& [k, coef] : printed_triple_coefficients()) printed += coef * norms[k];
        r.add_diagnostic("ZZ.printed_total", printed);
    }
    r.finalize();
    return r;
}

SinglePlusDoubleNorms single_plus_double_norms(const Kernel& g, const Kernel& h) {
    if (g.order() != 1 || h.order() != 2) fail(errc::argument, "single-plus-double bound needs orders 1 and 2");
    require_same_space(g, h);
    if (!h.symmetric()) fail(errc::contract_violation, "single-plus-double bound needs a symmetric h");
    SinglePlusDoubleNorms n;
    n.g_sq = lp_mass(g, 2);
    n.h_sq = lp_mass(h, 2);
    n.h21 = lp_norm(contract(h, h, 2, 1), 2);
    n.h11 = lp_norm(contract(h, h, 1, 1), 2);
    n.gh11 = lp_norm(contract(g, h, 1, 1), 2);
    n.g_cubic = lp_mass(g, 3);
    n.h_l4_sq = std::sqrt(lp_mass(h, 4));
    return n;
}

BoundReport assemble_single_plus_double(const SinglePlusDoubleNorms& n) {
    BoundReport r;
    r.add_item("1+2Bounds.var_defect", std::abs(1.0 - n.g_sq - 2.0 * n.h_sq));
    r.add_item("1+2Bounds.star21", 2.0 * n.h21);
    r.add_item("1+2Bounds.star11", std::sqrt(8.0) * n.h11);
    r.add_item("1+2Bounds.cross_gh", 3.0 * n.gh11);
    r.add_item("1+2Bounds.cubic_g", 32.0 * n.g_cubic);
    r.add_item("1+2Bounds.l4_h", 4.0 * std::sqrt(n.h_sq) * (n.h_l4_sq + std::sqrt(2.0) * n.h21));
    r.add_diagnostic("sub.cross_norm", n.gh11);
    r.add_diagnostic("sub.surrogate", std::sqrt(n.g_sq) * std::sqrt(n.h11));
    r.add_diagnostic("norm.g_sq", n.g_sq);
    r.add_diagnostic("norm.h_sq", n.h_sq);
    r.add_diagnostic("norm.h_star21", n.h21);
    r.add_diagnostic("norm.h_star11", n.h11);
    r.add_diagnostic("norm.g_cubic", n.g_cubic);
    r.add_diagnostic("norm.h_l4_sq", n.h_l4_sq);
    r.finalize();
    return r;
}

BoundReport bound_single_plus_double(const Kernel& g, const Kernel& h) {
    BoundReport r = assemble_single_plus_double(single_plus_double_norms(g, h));
    r.inputs_digest = kernel_digest({&g, &h});
    return r;
}

BoundReport estimate_general_bound(const ChaosExpansion& F, std::size_t n_samples, std::uint64_t seed,
                                   std::size_t threads) {
    if (n_samples < 2) fail(errc::insufficient_samples, "Monte Carlo bound needs at least two samples");
    if (F.max_order() > max_fast_order)
        fail(errc::unsupported_order, "Monte Carlo bound supports orders <= " + std::to_string(max_fast_order));
    ChaosExpansion Linv = apply_L_inverse(F);  // throws not-centered
    const std::size_t m = F.space().size();
    const auto w = F.space().weights();
    SampleGenerator gen(F.space_ptr());

    std::vector<double> t1(n_samples), t1sq(n_samples), t2(n_samples);
    parallel_for(n_samples, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            PoissonSample s = gen(seed, i);
            double f0 = evaluate_fast(F, s);
            double l0 = evaluate_fast(Linv, s);
            double inner = 0.0, cubic = 0.0;
            for (std::size_t z = 0; z < m; ++z) {
                PoissonSample sz = s.with_extra_point(z, F.space());
                double dF = evaluate_fast(F, sz) - f0;
                double dL = evaluate_fast(Linv, sz) - l0;
                inner += w[z] * dF * (-dL);
                cubic += w[z] * dF * dF * std::abs(dL);
            }
            t1[i] = std::abs(1.0 - inner);
            t1sq[i] = (1.0 - inner) * (1.0 - inner);
            t2[i] = cubic;
        }
    });
    auto mean_se = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= static_cast<double>(v.size() - 1);
        return std::pair{mean, std::sqrt(var / static_cast<double>(v.size()))};
    };
    auto [l1, l1_se] = mean_se(t1);
    auto [sq, sq_se] = mean_se(t1sq);
    auto [c, c_se] = mean_se(t2);

    BoundReport r;
    r.method = BoundMethod::monte_carlo;
    std::vector<const Kernel*> ks;
    for (const auto& [n, k] : F.kernels()) ks.push_back(&k);
    r.inputs_digest = kernel_digest(ks);

    double term1 = l1;
    double term1_se = l1_se;
    r.add_diagnostic("GenUpBound0.term1_l1", l1);
    r.add_diagnostic("GenUpBound0.term1_l1_se", l1_se);
    r.add_diagnostic("GenUpBound.term1_l2_mc", std::sqrt(sq));
    if (F.kernels().size() == 1) {
        const auto& [q, f] = *F.kernels().begin();
        double closed;
        if (q == 1) {
            closed = std::abs(1.0 - lp_mass(f, 2));
        } else {
            closed = bound_fixed_chaos(f, FixedChaosMode::exact_G).value("bound_on_int");
        }
        r.add_diagnostic("GenUpBound.term1_l2_closed", closed);
        r.add_diagnostic("normInt2.cubic", c);
        if (closed <= term1) {
            term1 = closed;
            term1_se = 0.0;
        }
    }
    r.add_item("GenUpBound.term1", term1);
    r.add_item("GenUpBound.term2", c);
    r.add_diagnostic("GenUpBound.term2_se", c_se);
    r.mc_std_error = std::sqrt(term1_se * term1_se + c_se * c_se);
    r.finalize();
    return r;
}

ChaosDiagnostics chaos_diagnostics(const Kernel& f, std::optional<std::size_t> mc_samples, std::uint64_t seed,
                                   std::size_t threads) {
    const int q = f.order();
    if (q < 1) fail(errc::argument, "diagnostics need order >= 1");
    if (!f.symmetric()) fail(errc::contract_violation, "diagnostics need a symmetric kernel");
    ChaosDiagnostics d;
    for (int r = 1; r <= q; ++r)
        for (int l = 1; l <= std::min(r, q - 1); ++l) d.contraction_norms[{r, l}] = lp_norm(contract(f, f, r, l), 2);
    d.l4_mass = lp_mass(f, 4);
    d.variance = factorial(q) * lp_mass(f, 2);
    if (mc_samples) {
        SampleStats st = run_experiment(ChaosExpansion::single(f), *mc_samples, seed, threads);
        d.kurtosis_mc = st.kurtosis;
        d.kurtosis_std_error = st.kurtosis_std_error;
    }
    return d;
}

}  // namespace pstein
