#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "bcot/common.hpp"

using namespace bcot;

TEST_CASE("Mat is row-major with zero init") {
    Mat m(2, 3);
    REQUIRE(m.rows == 2);
    REQUIRE(m.cols == 3);
    REQUIRE(m.a.size() == 6);
    for (double v : m.a) REQUIRE(v == 0.0);
    m(1, 2) = 5.0;
    REQUIRE(m.a[5] == 5.0);
}

TEST_CASE("Mat dot and marginal sums") {
    Mat p(2, 2);
    p(0, 0) = 0.1;
    p(0, 1) = 0.2;
    p(1, 0) = 0.3;
    p(1, 1) = 0.4;
    Mat c(2, 2);
    c(0, 0) = 1.0;
    c(0, 1) = 2.0;
    c(1, 0) = 3.0;
    c(1, 1) = 4.0;
    REQUIRE_THAT(p.dot(c), Catch::Matchers::WithinAbs(0.1 + 0.4 + 0.9 + 1.6, 1e-15));
    auto rs = p.row_sums();
    auto cs = p.col_sums();
    REQUIRE_THAT(rs[0], Catch::Matchers::WithinAbs(0.3, 1e-15));
    REQUIRE_THAT(rs[1], Catch::Matchers::WithinAbs(0.7, 1e-15));
    REQUIRE_THAT(cs[0], Catch::Matchers::WithinAbs(0.4, 1e-15));
    REQUIRE_THAT(cs[1], Catch::Matchers::WithinAbs(0.6, 1e-15));
}

TEST_CASE("max_abs_diff checks lengths") {
    REQUIRE(max_abs_diff({1.0, 2.0}, {1.0, 2.5}) == 0.5);
    REQUIRE_THROWS_AS(max_abs_diff({1.0}, {1.0, 2.0}), Error);
}

TEST_CASE("mix_seed decorrelates nearby inputs") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 64; ++s)
        for (std::uint64_t k = 0; k < 8; ++k) seen.insert(mix_seed(s, k));
    REQUIRE(seen.size() == 64 * 8);
    REQUIRE(mix_seed(1, 2) != mix_seed(2, 1));
}

TEST_CASE("Rng uniform stays in [0,1) and is reproducible") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        double u = a.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        REQUIRE(u == b.uniform());
    }
}

TEST_CASE("Rng uniform_int covers the range") {
    Rng rng(7);
    std::set<int> seen;
    for (int i = 0; i < 2000; ++i) {
        int v = rng.uniform_int(5);
        REQUIRE(v >= 0);
        REQUIRE(v < 5);
        seen.insert(v);
    }
    REQUIRE(seen.size() == 5);
}

TEST_CASE("pick_weighted respects weights") {
    Rng rng(11);
    std::vector<double> w = {0.0, 0.25, 0.75};
    std::vector<int> counts(3, 0);
    for (int i = 0; i < 20000; ++i) ++counts[rng.pick_weighted(w)];
    REQUIRE(counts[0] == 0);
    REQUIRE(counts[1] > 3500);
    REQUIRE(counts[2] > 12500);
}

TEST_CASE("pick_weighted rejects degenerate weights") {
    Rng rng(1);
    std::vector<double> zero = {0.0, 0.0};
    REQUIRE_THROWS_AS(rng.pick_weighted(zero), Error);
}
