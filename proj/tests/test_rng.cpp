#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "fedsim/rng.hpp"

using namespace fedsim;

TEST_CASE("mix_seed: deterministic, argument-sensitive") {
    CHECK(mix_seed(1, 2, 3) == mix_seed(1, 2, 3));
    std::set<std::uint64_t> seeds;
    for (std::uint64_t a = 0; a < 20; ++a)
        for (std::uint64_t b = 0; b < 20; ++b) seeds.insert(mix_seed(7, a, b));
    CHECK(seeds.size() == 400);  // no collisions among nearby stream ids
    CHECK(mix_seed(1, 2) != mix_seed(2, 1));
}

TEST_CASE("uniform: range, determinism, mean") {
    Rng a(9), b(9);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double x = a.uniform();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        CHECK(x == b.uniform());
        sum += x;
    }
    CHECK(std::abs(sum / 100000 - 0.5) < 0.01);

    Rng c(10);
    for (int i = 0; i < 1000; ++i) {
        const double x = c.uniform(-3.0, 5.0);
        CHECK(x >= -3.0);
        CHECK(x < 5.0);
    }
}

TEST_CASE("uniform_int: inclusive bounds, near-uniform") {
    Rng rng(11);
    std::array<int, 6> counts{};
    for (int i = 0; i < 60000; ++i) {
        const auto x = rng.uniform_int(2, 7);
        REQUIRE(x >= 2);
        REQUIRE(x <= 7);
        ++counts[static_cast<std::size_t>(x - 2)];
    }
    for (int c : counts) CHECK(std::abs(c - 10000) < 500);
    CHECK(rng.uniform_int(4, 4) == 4);
}

TEST_CASE("gamma: moments match shape/scale") {
    Rng rng(13);
    for (double shape : {0.5, 1.0, 3.5}) {
        double sum = 0.0, sumsq = 0.0;
        const int n = 200000;
        for (int i = 0; i < n; ++i) {
            const double x = rng.gamma(shape);
            CHECK(x > 0.0);
            sum += x;
            sumsq += x * x;
        }
        const double mean = sum / n;
        const double var = sumsq / n - mean * mean;
        CHECK(std::abs(mean - shape) < 0.05 * std::max(shape, 1.0));
        CHECK(std::abs(var - shape) < 0.1 * std::max(shape, 1.0));
    }
}

TEST_CASE("shuffle: permutation, determinism, mixing") {
    std::vector<int> v(100);
    std::iota(v.begin(), v.end(), 0);

    Rng a(17), b(17);
    auto va = v, vb = v;
    a.shuffle(va);
    b.shuffle(vb);
    CHECK(va == vb);
    CHECK(va != v);  // astronomically unlikely to be identity
    auto sorted = va;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == v);

    // element 0 lands roughly uniformly
    std::array<int, 10> where{};
    for (int trial = 0; trial < 20000; ++trial) {
        std::vector<int> w(10);
        std::iota(w.begin(), w.end(), 0);
        a.shuffle(w);
        for (int pos = 0; pos < 10; ++pos)
            if (w[static_cast<std::size_t>(pos)] == 0) ++where[static_cast<std::size_t>(pos)];
    }
    for (int c : where) CHECK(std::abs(c - 2000) < 300);
}
