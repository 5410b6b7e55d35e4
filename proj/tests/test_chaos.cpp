#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "poisson_stein/chaos.hpp"
#include "poisson_stein/error.hpp"
#include "poisson_stein/simulator.hpp"
#include "support.hpp"

using namespace pstein;

namespace {

ChaosExpansion random_chaos(std::mt19937_64& rng, const SpacePtr& sp, int max_order, double constant = 0.0) {
    std::vector<Kernel> ks;
    for (int n = 1; n <= max_order; ++n) ks.push_back(oracle::random_kernel(rng, sp, n));
    return ChaosExpansion(sp, constant, std::move(ks));
}

Kernel indicator(const SpacePtr& sp, std::vector<std::size_t> cells) {
    std::vector<double> v(sp->size(), 0.0);
    for (auto c : cells) v[c] = 1.0;
    return Kernel(sp, 1, std::move(v));
}

}  // namespace

TEST_CASE("expansion ingest symmetrizes and merges") {
    auto sp = make_space({1.0, 1.0});
    Kernel f(sp, 2, {0.0, 2.0, 0.0, 0.0});
    ChaosExpansion F(sp, 0.5, {f, Kernel::scalar(sp, 1.5)});
    CHECK(F.constant() == 2.0);
    REQUIRE(F.kernel(2));
    CHECK(F.kernel(2)->at({1, 0}) == 1.0);
    CHECK(F.kernel(2)->symmetric());
    ChaosExpansion G(sp, 0.0, {Kernel(sp, 1)});
    CHECK(G.max_order() == 0);
}

TEST_CASE("multiply: first-chaos cases") {
    auto sp = make_space({0.5, 1.0, 2.0, 0.7});
    Kernel f = indicator(sp, {0, 1});
    Kernel g = indicator(sp, {2, 3});
    ChaosExpansion P = multiply(f, g);
    CHECK(P.constant() == 0.0);
    CHECK(P.max_order() == 2);
    CHECK_FALSE(P.kernel(1));
    CHECK(oracle::max_abs_diff(*P.kernel(2), oracle::symmetrize(oracle::contract(f, g, 0, 0))) <= 1e-15);

    std::mt19937_64 rng(1);
    Kernel h = oracle::random_kernel(rng, sp, 1);
    ChaosExpansion S = multiply(h, h);
    CHECK(S.constant() == doctest::Approx(lp_mass(h, 2)).epsilon(1e-14));
    for (std::size_t c = 0; c < 4; ++c) CHECK(S.kernel(1)->at({c}) == doctest::Approx(h.at({c}) * h.at({c})));
    CHECK(oracle::max_abs_diff(*S.kernel(2), oracle::contract(h, h, 0, 0)) <= 1e-15);
}

TEST_CASE("multiply: square equals the G-operator expansion") {
    std::mt19937_64 rng(2);
    auto sp = oracle::random_space(rng, 4);
    for (int q : {1, 2, 3}) {
        Kernel f = oracle::random_kernel(rng, sp, q);
        ChaosExpansion sq = multiply(f, f);
        CHECK(sq.constant() == doctest::Approx(G_op(f, 0).scalar_value()).epsilon(1e-12));
        for (int p = 1; p <= 2 * q; ++p) {
            Kernel gp = G_op(f, p);
            const Kernel* k = sq.kernel(p);
            if (!k) {
                CHECK(oracle::max_abs(gp) <= 1e-12);
                continue;
            }
            CHECK(oracle::max_abs_diff(*k, gp) <= 1e-12 * (1.0 + oracle::max_abs(gp)));
        }
    }
}

TEST_CASE("multiply: isometry constant") {
    std::mt19937_64 rng(3);
    auto sp = oracle::random_space(rng, 4);
    for (int p = 1; p <= 3; ++p)
        for (int q = 1; q <= 3; ++q) {
            Kernel f = oracle::random_kernel(rng, sp, p);
            Kernel g = oracle::random_kernel(rng, sp, q);
            double expected = p == q ? factorial(p) * l2_inner(f, g) : 0.0;
            CHECK(multiply(f, g).constant() == doctest::Approx(expected).epsilon(1e-12).scale(1.0));
        }
}

TEST_CASE("multiply: pathwise exact against the simulator") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 9; ++trial) {
        int p = 1 + trial % 3, q = 1 + trial / 3;
        auto sp = oracle::random_space(rng, 4 + trial % 3);
        Kernel f = oracle::random_kernel(rng, sp, p);
        Kernel g = oracle::random_kernel(rng, sp, q);
        ChaosExpansion P = multiply(f, g);
        ChaosExpansion F = ChaosExpansion::single(f), G = ChaosExpansion::single(g);
        for (std::uint64_t s = 0; s < 30; ++s) {
            PoissonSample smp = sample(sp, 17, s);
            double prod = evaluate(F, smp) * evaluate(G, smp);
            CHECK(std::abs(evaluate(P, smp) - prod) <= 1e-9 * (1.0 + std::abs(prod)));
        }
    }
}

TEST_CASE("multiply: asymmetric input is rejected") {
    auto sp = make_space({1.0, 1.0});
    Kernel f(sp, 2, {0.0, 2.0, 0.0, 0.0});
    try {
        multiply(f, f);
        FAIL("expected contract-violation");
    } catch (const Error& e) {
        CHECK(e.label() == errc::contract_violation);
    }
}

TEST_CASE("apply_D on single chaoses") {
    std::mt19937_64 rng(5);
    auto sp = oracle::random_space(rng, 4);
    Kernel h = oracle::random_kernel(rng, sp, 1);
    KernelFamily d1 = apply_D(ChaosExpansion::single(h));
    for (std::size_t z = 0; z < 4; ++z) {
        CHECK(d1.at[z].constant() == h.at({z}));
        CHECK(d1.at[z].max_order() == 0);
    }
    Kernel f = oracle::random_kernel(rng, sp, 2);
    KernelFamily d2 = apply_D(ChaosExpansion::single(f));
    for (std::size_t z = 0; z < 4; ++z) {
        REQUIRE(d2.at[z].kernel(1));
        for (std::size_t a = 0; a < 4; ++a)
            CHECK(d2.at[z].kernel(1)->at({a}) == doctest::Approx(2.0 * f.at({z, a})));
    }
    KernelFamily d0 = apply_D(ChaosExpansion(sp, 3.0));
    for (const auto& e : d0.at) {
        CHECK(e.constant() == 0.0);
        CHECK(e.max_order() == 0);
    }
}

TEST_CASE("L and L inverse") {
    std::mt19937_64 rng(6);
    auto sp = oracle::random_space(rng, 3);
    Kernel h = oracle::random_kernel(rng, sp, 1);
    ChaosExpansion F1 = ChaosExpansion::single(h);
    CHECK(max_kernel_difference(apply_L_inverse(F1).scaled(-1.0), F1) <= 1e-15);

    Kernel f = oracle::random_kernel(rng, sp, 3);
    ChaosExpansion F3 = ChaosExpansion::single(f);
    CHECK(max_kernel_difference(apply_L_inverse(F3).scaled(-1.0), F3.scaled(1.0 / 3.0)) <= 1e-15);
    CHECK(max_kernel_difference(apply_L(F3), F3.scaled(-3.0)) <= 1e-15);

    ChaosExpansion G = random_chaos(rng, sp, 3, 2.0);
    CHECK(apply_L(G).constant() == 0.0);
    try {
        apply_L_inverse(G);
        FAIL("expected not-centered");
    } catch (const Error& e) {
        CHECK(e.label() == errc::not_centered);
    }
    for (int trial = 0; trial < 10; ++trial) {
        ChaosExpansion C = random_chaos(rng, sp, 3);
        CHECK(max_kernel_difference(apply_L(apply_L_inverse(C)), C) <= 1e-12);
    }
}

TEST_CASE("skorohod examples and delta D = -L") {
    std::mt19937_64 rng(7);
    auto sp = oracle::random_space(rng, 4);
    Kernel h = oracle::random_kernel(rng, sp, 1);
    KernelFamily det{sp, {}};
    for (std::size_t z = 0; z < 4; ++z) det.at.emplace_back(sp, h.at({z}));
    CHECK(max_kernel_difference(skorohod(det), ChaosExpansion::single(h)) <= 1e-15);

    Kernel f = oracle::random_kernel(rng, sp, 2);
    KernelFamily u{sp, {}};
    for (std::size_t z = 0; z < 4; ++z) u.at.push_back(ChaosExpansion::single(slice(f, z)));
    CHECK(max_kernel_difference(skorohod(u), ChaosExpansion::single(f)) <= 1e-14);

    for (int trial = 0; trial < 10; ++trial) {
        ChaosExpansion F = random_chaos(rng, sp, 3);
        CHECK(max_kernel_difference(skorohod(apply_D(F)), apply_L(F).scaled(-1.0)) <= 1e-12);
    }
}

TEST_CASE("pathwise difference") {
    std::mt19937_64 rng(8);
    auto sp = oracle::random_space(rng, 5);
    Kernel h = oracle::random_kernel(rng, sp, 1);
    ChaosExpansion F = ChaosExpansion::single(h);
    for (std::uint64_t s = 0; s < 10; ++s) {
        PoissonSample smp = sample(sp, 3, s);
        for (std::size_t z = 0; z < 5; ++z)
            CHECK(pathwise_difference(F, smp, z) == doctest::Approx(h.at({z})).epsilon(1e-12));
    }

    Kernel a = indicator(sp, {0, 1}), b = indicator(sp, {3, 4});
    ChaosExpansion AB = multiply(a, b);
    for (std::uint64_t s = 0; s < 10; ++s) {
        PoissonSample smp = sample(sp, 4, s);
        double nA = smp.centered[0] + smp.centered[1];
        double nB = smp.centered[3] + smp.centered[4];
        CHECK(evaluate(AB, smp) == doctest::Approx(nA * nB).epsilon(1e-12));
        for (std::size_t z = 0; z < 5; ++z) {
            double expected = (z <= 1 ? nB : 0.0) + (z >= 3 ? nA : 0.0);
            CHECK(pathwise_difference(AB, smp, z) == doctest::Approx(expected).epsilon(1e-12).scale(1.0));
        }
    }

    for (int trial = 0; trial < 5; ++trial) {
        ChaosExpansion G = random_chaos(rng, sp, 3, 0.3);
        KernelFamily D = apply_D(G);
        PoissonSample smp = sample(sp, 9, trial);
        for (std::size_t z = 0; z < 5; ++z) {
            double lhs = pathwise_difference(G, smp, z);
            double rhs = evaluate(D.at[z], smp);
            CHECK(std::abs(lhs - rhs) <= 1e-9 * (1.0 + std::abs(rhs)));
        }
    }
}

TEST_CASE("property: pathwise product rule") {
    std::mt19937_64 rng(9);
    auto sp = oracle::random_space(rng, 4);
    for (int trial = 0; trial < 10; ++trial) {
        ChaosExpansion F = random_chaos(rng, sp, 2, 0.1);
        ChaosExpansion G = random_chaos(rng, sp, 2, -0.4);
        ChaosExpansion FG = multiply(F, G);
        PoissonSample smp = sample(sp, 5, trial);
        double f = evaluate(F, smp), g = evaluate(G, smp);
        for (std::size_t z = 0; z < 4; ++z) {
            double df = pathwise_difference(F, smp, z), dg = pathwise_difference(G, smp, z);
            double lhs = pathwise_difference(FG, smp, z);
            double rhs = f * dg + g * df + df * dg;
            CHECK(std::abs(lhs - rhs) <= 1e-9 * (1.0 + std::abs(rhs)));
        }
    }
}

TEST_CASE("property: adjoint identity and orthogonality under Monte Carlo") {
    std::mt19937_64 rng(10);
    auto sp = oracle::random_space(rng, 3, 0.5, 1.0);
    ChaosExpansion G = random_chaos(rng, sp, 2);
    KernelFamily u{sp, {}};
    Kernel uk = oracle::random_kernel(rng, sp, 2);
    for (std::size_t z = 0; z < 3; ++z) u.at.push_back(ChaosExpansion(sp, 0.2 * z, {slice(uk, z)}));
    ChaosExpansion du = skorohod(u);
    KernelFamily DG = apply_D(G);

    const std::size_t n = 20000;
    std::vector<double> lhs(n), rhs(n);
    ChaosExpansion I1(sp, 0.0, {*G.kernel(1)}), I2(sp, 0.0, {*G.kernel(2)});
    std::vector<double> cross(n);
    for (std::size_t s = 0; s < n; ++s) {
        PoissonSample smp = sample(sp, 21, s);
        lhs[s] = evaluate(G, smp) * evaluate(du, smp);
        double inner = 0.0;
        for (std::size_t z = 0; z < 3; ++z) inner += sp->weight(z) * evaluate(DG.at[z], smp) * evaluate(u.at[z], smp);
        rhs[s] = inner;
        cross[s] = evaluate(I1, smp) * evaluate(I2, smp);
    }
    std::vector<double> diff(n);
    for (std::size_t s = 0; s < n; ++s) diff[s] = lhs[s] - rhs[s];
    SampleStats d = summarize(diff);
    CHECK(std::abs(d.mean) <= 4.0 * d.mean_std_error);
    SampleStats c = summarize(cross);
    CHECK(std::abs(c.mean) <= 4.0 * c.mean_std_error);
}
