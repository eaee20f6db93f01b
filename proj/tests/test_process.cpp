#include <catch2/catch_amalgamated.hpp>

#include "bcot/process.hpp"

using namespace bcot;

namespace {

FiniteProcess two_state(double p_stay) {
    FiniteProcess p;
    p.n_states = 2;
    p.horizon = 3;
    p.initial = {0.6, 0.4};
    p.kernel = Mat(2, 2);
    p.kernel(0, 0) = p_stay;
    p.kernel(0, 1) = 1.0 - p_stay;
    p.kernel(1, 0) = 1.0 - p_stay;
    p.kernel(1, 1) = p_stay;
    p.state_values = FiniteProcess::default_values(2);
    return p;
}

}  // namespace

TEST_CASE("default state values are normalized ranks") {
    auto v = FiniteProcess::default_values(4);
    REQUIRE(v == std::vector<double>{0.0, 0.25, 0.5, 0.75});
}

TEST_CASE("validate rejects malformed processes") {
    FiniteProcess p = two_state(0.7);
    REQUIRE_NOTHROW(p.validate());

    FiniteProcess bad = p;
    bad.initial = {0.6, 0.6};
    REQUIRE_THROWS_AS(bad.validate(), Error);

    bad = p;
    bad.kernel(0, 0) = 0.9;
    REQUIRE_THROWS_AS(bad.validate(), Error);

    bad = p;
    bad.state_values = {0.5, 0.5};
    REQUIRE_THROWS_AS(bad.validate(), Error);

    bad = p;
    bad.horizon = 0;
    REQUIRE_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("estimate_process recovers frequencies") {
    std::vector<RankPath> paths = {{0, 0, 1}, {0, 1, 1}, {1, 1, 1}, {0, 0, 0}};
    FiniteProcess p = estimate_process(paths, 2);
    REQUIRE(p.horizon == 3);
    REQUIRE_THAT(p.initial[0], Catch::Matchers::WithinAbs(0.75, 1e-15));
    REQUIRE_THAT(p.initial[1], Catch::Matchers::WithinAbs(0.25, 1e-15));
    // transitions from 0: 0->0 three times, 0->1 twice
    REQUIRE_THAT(p.kernel(0, 0), Catch::Matchers::WithinAbs(0.6, 1e-15));
    REQUIRE_THAT(p.kernel(0, 1), Catch::Matchers::WithinAbs(0.4, 1e-15));
    // transitions from 1: 1->1 four times
    REQUIRE_THAT(p.kernel(1, 1), Catch::Matchers::WithinAbs(1.0, 1e-15));
}

TEST_CASE("estimate_process turns unseen source states into self-loops") {
    std::vector<RankPath> paths = {{0, 0}, {0, 0}};
    FiniteProcess p = estimate_process(paths, 3);
    REQUIRE(p.kernel(1, 1) == 1.0);
    REQUIRE(p.kernel(2, 2) == 1.0);
    REQUIRE(p.kernel(1, 0) == 0.0);
}

TEST_CASE("estimate_process validates input") {
    REQUIRE_THROWS_AS(estimate_process({}, 2), Error);
    REQUIRE_THROWS_AS(estimate_process({{0, 5}}, 2), Error);
    REQUIRE_THROWS_AS(estimate_process({{}}, 2), Error);
}

TEST_CASE("path_probability chains initial law and kernel") {
    FiniteProcess p = two_state(0.7);
    REQUIRE_THAT(path_probability(p, {0, 0, 1}),
                 Catch::Matchers::WithinAbs(0.6 * 0.7 * 0.3, 1e-15));
    REQUIRE_THAT(path_probability(p, {1}), Catch::Matchers::WithinAbs(0.4, 1e-15));
    REQUIRE_THROWS_AS(path_probability(p, {0, 0, 0, 0}), Error);
    REQUIRE_THROWS_AS(path_probability(p, {}), Error);
}

TEST_CASE("enumerate_paths covers the path space with total mass 1") {
    FiniteProcess p = two_state(0.7);
    auto paths = enumerate_paths(p, 3);
    REQUIRE(paths.size() == 8);
    double total = 0.0;
    for (const auto& [path, w] : paths) {
        REQUIRE(path.size() == 3);
        REQUIRE_THAT(w, Catch::Matchers::WithinAbs(path_probability(p, path), 1e-15));
        total += w;
    }
    REQUIRE_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("enumerate_paths drops zero-probability branches") {
    FiniteProcess p = two_state(1.0);  // absorbing in both states
    auto paths = enumerate_paths(p, 3);
    REQUIRE(paths.size() == 2);
}

TEST_CASE("enumerate_futures excludes the starting state") {
    FiniteProcess p = two_state(0.7);
    auto futs = enumerate_futures(p, 0, 2);
    REQUIRE(futs.size() == 4);
    double total = 0.0;
    for (const auto& [f, w] : futs) {
        REQUIRE(f.size() == 2);
        total += w;
    }
    REQUIRE_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
    auto zero = enumerate_futures(p, 0, 0);
    REQUIRE(zero.size() == 1);
    REQUIRE(zero[0].first.empty());
    REQUIRE(zero[0].second == 1.0);
}

TEST_CASE("simulated paths follow the law approximately") {
    FiniteProcess p = two_state(0.8);
    Rng rng(123);
    int first_zero = 0, stay = 0, moves = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        RankPath path = simulate_path(p, rng);
        REQUIRE(path.size() == 3);
        if (path[0] == 0) ++first_zero;
        for (int t = 1; t < 3; ++t) {
            ++moves;
            if (path[t] == path[t - 1]) ++stay;
        }
    }
    REQUIRE_THAT(first_zero / double(n), Catch::Matchers::WithinAbs(0.6, 0.02));
    REQUIRE_THAT(stay / double(moves), Catch::Matchers::WithinAbs(0.8, 0.02));
}
