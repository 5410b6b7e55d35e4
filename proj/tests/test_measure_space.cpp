#include <algorithm>
#include <random>
#include <vector>

#include "doctest.h"
#include "poisson_stein/error.hpp"
#include "poisson_stein/measure_space.hpp"

using namespace pstein;

TEST_CASE("product_weight multiplies cell weights") {
    auto a = make_space({1, 1, 1});
    std::vector<std::size_t> i1{0, 2};
    CHECK(product_weight(*a, i1) == 1.0);

    auto b = make_space({0.5, 2.0});
    std::vector<std::size_t> i2{0, 1, 1};
    CHECK(product_weight(*b, i2) == 2.0);

    auto c = make_space({0.25, 0.75, 1.5});
    std::vector<std::size_t> i3{2, 0};
    CHECK(product_weight(*c, i3) == doctest::Approx(1.5 * 0.25).epsilon(1e-15));
}

TEST_CASE("product_weight rejects out-of-range cells") {
    auto s = make_space({1, 2});
    std::vector<std::size_t> bad{0, 2};
    try {
        product_weight(*s, bad);
        FAIL("expected invalid-index");
    } catch (const Error& e) {
        CHECK(e.label() == errc::invalid_index);
    }
}

TEST_CASE("uniform_interval_space") {
    auto s = uniform_interval_space(4.0, 4);
    for (double w : s->weights()) CHECK(w == 1.0);
    auto t = uniform_interval_space(1.0, 10);
    CHECK(t->size() == 10);
    for (double w : t->weights()) CHECK(w == doctest::Approx(0.1).epsilon(1e-15));
    auto u = uniform_interval_space(6.0, 4);
    for (double w : u->weights()) CHECK(w == 1.5);
}

TEST_CASE("weights must be positive and finite") {
    CHECK_THROWS_AS(make_space({1.0, 0.0}), Error);
    CHECK_THROWS_AS(make_space({1.0, -2.0}), Error);
    CHECK_THROWS_AS(make_space({}), Error);
}

TEST_CASE("property: product_weight is permutation invariant") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.1, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> w(6);
        for (auto& x : w) x = U(rng);
        auto s = make_space(w);
        std::vector<std::size_t> idx{rng() % 6, rng() % 6, rng() % 6, rng() % 6};
        double ref = product_weight(*s, idx);
        std::sort(idx.begin(), idx.end());
        do {
            CHECK(product_weight(*s, idx) == doctest::Approx(ref).epsilon(1e-14));
        } while (std::next_permutation(idx.begin(), idx.end()));
        std::vector<std::size_t> one{idx[0]};
        CHECK(product_weight(*s, one) == s->weight(idx[0]));
    }
}

TEST_CASE("property: refinement preserves total mass") {
    for (double len : {1.0, 3.0, 16.0})
        for (std::size_t m : {1u, 4u, 32u}) {
            double a = uniform_interval_space(len, m)->total_mass();
            double b = uniform_interval_space(len, 2 * m)->total_mass();
            CHECK(a == doctest::Approx(len).epsilon(1e-14));
            CHECK(b == doctest::Approx(a).epsilon(1e-14));
        }
}

TEST_CASE("truncated flag and labels are carried") {
    DiscreteSpace s({1.0, 2.0}, {{0.5, 1.0}, {0.5, 2.0}}, true);
    CHECK(s.truncated());
    CHECK(s.has_labels());
    CHECK(s.label(1)[1] == 2.0);
}
