// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tandem_tail/errors.hpp"
#include "tandem_tail/sim.hpp"

using namespace tandem;
using namespace tandem::sim;

namespace {

SimConfig small_config(double horizon = 200.0) {
    SimConfig c;
    c.dt = 1e-3;
    c.horizon = horizon;
    c.burn_in = 10.0;
    c.grid = LevelGrid::uniform(0.05, 200);
    c.joint_bins = 8;
    c.joint_max = {4.0, 4.0, 4.0};
    c.boundary_weight = {0.0, 0.0, 1.0};
    c.batch_time = 20.0;
    c.threads = 1;
    return c;
}

}  // namespace

TEST_CASE("level grid") {
    const auto g = LevelGrid::uniform(0.5, 4);
    CHECK(g.size() == 4);
    CHECK(g[3] == 1.5);
    CHECK(g.step() == 0.5);
    CHECK(g.bin_of(-0.1) == -1);
    CHECK(g.bin_of(0.0) == 0);
    CHECK(g.bin_of(0.49) == 0);
    CHECK(g.bin_of(0.5) == 1);
    CHECK(g.bin_of(1.0) == 2);
    CHECK(g.bin_of(9.0) == 3);

    const LevelGrid u({0.0, 0.1, 1.0});
    CHECK(u.step() == 0.0);
    CHECK(u.bin_of(0.5) == 1);
    CHECK(u.bin_of(1.0) == 2);
    CHECK(u.bin_of(-1.0) == -1);

    // Exact multiples of a step that is not representable.
    const auto t = LevelGrid::uniform(0.1, 100);
    for (std::size_t k = 0; k < t.size(); ++k) CHECK(t.bin_of(t[k]) == static_cast<std::ptrdiff_t>(k));

    CHECK_THROWS_AS(LevelGrid({0.0, 0.0}), InvalidParameter);
    CHECK_THROWS_AS(LevelGrid(std::vector<double>{}), InvalidParameter);
    CHECK_THROWS_AS(LevelGrid::uniform(0.0, 3), InvalidParameter);
}

TEST_CASE("config validation") {
    SimConfig c = small_config();
    CHECK_NOTHROW(validate(c));
    c.dt = 0.02;
    CHECK_THROWS_AS(validate(c), InvalidParameter);
    c = small_config();
    c.burn_in = c.horizon + 1.0;
    CHECK_THROWS_AS(validate(c), InvalidParameter);
    c = small_config();
    c.replicas = 0;
    CHECK_THROWS_AS(validate(c), InvalidParameter);
    c = small_config();
    c.burn_in = c.horizon;
    CHECK_NOTHROW(validate(c));
}

TEST_CASE("single step from the origin regulates every node") {
    const auto m = validate(oracle::set_a());
    const double dt = 0.01;
    const auto out = step(State{}, m, dt, {0.0, 0.0, 0.0});
    CHECK(out.state.level[0] == 0.0);
    CHECK(out.state.level[1] == 0.0);
    CHECK(out.state.level[2] == 0.0);
    // Regulation absorbs exactly the net deficit c_k - sum lambda.
    CHECK(out.regulator_increment[0] == doctest::Approx(0.01));
    CHECK(out.regulator_increment[1] == doctest::Approx(0.015));
    CHECK(out.regulator_increment[2] == doctest::Approx(0.02));
    CHECK(out.state.regulator[2] == doctest::Approx(0.02));
}

TEST_CASE("single step in the interior") {
    const auto m = validate(oracle::set_a());
    const double dt = 0.01;
    State s;
    s.level = {1.0, 1.0, 1.0};
    const auto out = step(s, m, dt, {1.0, -1.0, 0.5});
    CHECK(out.state.level[0] == doctest::Approx(1.09));
    CHECK(out.state.level[1] == doctest::Approx(0.895));
    CHECK(out.state.level[2] == doctest::Approx(1.045));
    CHECK(out.regulator_increment == Vec3{});
}

TEST_CASE("downstream node sees the upstream regulation") {
    const auto m = validate(oracle::set_a());
    State s;
    s.level = {0.0, 0.02, 0.0};
    const auto out = step(s, m, 0.01, {-1.0, 0.0, 0.0});
    // tmp1 = -0.01 - 0.1, dY1 = 0.11; tmp2 = 0.02 - 0.005 - 0.11
    CHECK(out.regulator_increment[0] == doctest::Approx(0.11));
    CHECK(out.state.level[1] == 0.0);
    CHECK(out.regulator_increment[1] == doctest::Approx(0.095));
    CHECK_THROWS_AS(step(State{{-1.0, 0.0, 0.0}, {}}, m, 0.01, {}), InvalidParameter);
}

TEST_CASE("node 1 agrees with an independent one-dimensional reflection") {
    const auto m = validate(oracle::set_b());
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    const double dt = 1e-3;
    State s;
    double l = 0.0;
    double y = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const Vec3 g{n01(rng), n01(rng), n01(rng)};
        s = step(s, m, dt, g).state;
        const double tmp = l + (1.0 - 2.0) * dt + std::sqrt(dt) * g[0];
        y += std::max(0.0, -tmp);
        l = std::max(0.0, tmp);
        REQUIRE(s.level[0] == doctest::Approx(l).epsilon(1e-12));
    }
    CHECK(s.regulator[0] == doctest::Approx(y).epsilon(1e-10));
}

TEST_CASE("determinism across runs and thread counts") {
    const auto m = validate(oracle::set_a());
    SimConfig c = small_config();
    c.replicas = 3;
    const auto a = run(m, c);
    const auto b = run(m, c);
    CHECK(a == b);
    c.threads = 3;
    CHECK(run(m, c) == a);
    c.seed += 1;
    CHECK_FALSE(run(m, c) == a);
}

TEST_CASE("merge order: shuffled completion, commutativity, associativity") {
    const auto m = validate(oracle::set_a());
    SimConfig c = small_config(100.0);
    c.replicas = 5;
    const auto reference = run(m, c);

    std::vector<int> order(5);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937 rng(11);
    for (int trial = 0; trial < 3; ++trial) {
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<StationaryAccumulator> slots(5);
        for (int r : order) slots[r] = run_replica(m, c, r);
        CHECK(merge_replicas(slots) == reference);
    }

    const auto r0 = run_replica(m, c, 0);
    const auto r1 = run_replica(m, c, 1);
    const auto r2 = run_replica(m, c, 2);
    auto ab = r0;
    ab.merge(r1);
    auto ba = r1;
    ba.merge(r0);
    CHECK(ab == ba);

    auto left = ab;
    left.merge(r2);
    auto bc = r1;
    bc.merge(r2);
    auto right = r0;
    right.merge(bc);
    CHECK(left.steps() == right.steps());
    for (int node = 1; node <= 3; ++node) {
        CHECK(left.exceedance_counts(node) == right.exceedance_counts(node));
        CHECK(left.regulator_total()[node - 1] ==
              doctest::Approx(right.regulator_total()[node - 1]).epsilon(1e-14));
    }
    for (int p = 0; p < 3; ++p) {
        CHECK(left.pair_exceedance_count(p, 10) == right.pair_exceedance_count(p, 10));
    }
    CHECK(left.joint_exceedance_count({1, 1, 1}) == right.joint_exceedance_count({1, 1, 1}));
}

TEST_CASE("merge rejects different layouts") {
    auto a = StationaryAccumulator(LevelGrid::uniform(0.1, 10), 1e-3, 4, {}, {});
    auto b = StationaryAccumulator(LevelGrid::uniform(0.1, 11), 1e-3, 4, {}, {});
    CHECK_THROWS_AS(a.merge(b), GridMismatch);
    auto c = StationaryAccumulator(LevelGrid::uniform(0.1, 10), 2e-3, 4, {}, {});
    CHECK_THROWS_AS(a.merge(c), GridMismatch);
}

TEST_CASE("empty window") {
    const auto m = validate(oracle::set_a());
    SimConfig c = small_config(10.0);
    c.burn_in = 10.0;
    const auto acc = run(m, c);
    CHECK(acc.steps() == 0);
    CHECK_THROWS_AS(estimate_regulator_rates(acc), EmptyWindow);
    CHECK_THROWS_AS(estimate_boundary_transform(acc, 2), EmptyWindow);
}

TEST_CASE("accumulator counts") {
    StationaryAccumulator acc(LevelGrid::uniform(1.0, 4), 0.5, 2, {4.0, 4.0, 4.0}, {});
    acc.record({0.5, 2.5, 3.5});
    acc.record({1.5, 0.0, 9.0});
    CHECK(acc.window_length() == 1.0);
    CHECK(acc.exceedance_count(1, 0) == 2);
    CHECK(acc.exceedance_count(1, 1) == 1);
    CHECK(acc.exceedance_count(2, 2) == 1);
    CHECK(acc.exceedance_count(3, 3) == 2);
    CHECK(acc.exceedance_counts(1) == std::vector<std::uint64_t>{2, 1, 0, 0});
    // Pair (1,2): min bins are 0 and 0.
    CHECK(acc.pair_exceedance_count(pair_index(1, 2), 1) == 0);
    // Pair (1,3): min bins are 0 and 1.
    CHECK(acc.pair_exceedance_count(pair_index(3, 1), 1) == 1);
    CHECK(acc.joint_exceedance_count({0, 0, 0}) == 2);
    CHECK(acc.joint_exceedance_count({0, 1, 1}) == 1);
    CHECK(acc.joint_marginal_count(3, 1) == 2);
    CHECK(acc.joint_edge(2, 1) == 2.0);
    CHECK_THROWS_AS(pair_index(2, 2), InvalidParameter);
}

TEST_CASE("regulator rates and boundary transform on a moderate run") {
    const auto m = validate(oracle::set_a());
    SimConfig c = small_config(2000.0);
    c.grid = LevelGrid::uniform(0.05, 400);
    const auto acc = run(m, c);
    const auto est = estimate_regulator_rates_with_error(acc);
    const Vec3 truth = regulator_rates(m.params());
    for (int k = 0; k < 3; ++k) {
        CHECK(est.rate[k] == doctest::Approx(truth[k]).epsilon(0.05));
        CHECK(est.half_width[k] > 0.0);
    }
    CHECK(estimate_boundary_transform(acc, 2) == doctest::Approx(2.0).epsilon(0.08));
}

TEST_CASE("halving dt leaves the regulator rates in place") {
    const auto m = validate(oracle::set_a());
    SimConfig c = small_config(1000.0);
    const auto coarse = estimate_regulator_rates(run(m, c));
    c.dt = 5e-4;
    const auto fine = estimate_regulator_rates(run(m, c));
    for (int k = 0; k < 3; ++k) CHECK(std::abs(coarse[k] - fine[k]) < 0.06 * fine[k]);
}

TEST_CASE("four replicas against one replica of four times the horizon") {
    const auto m = validate(oracle::set_a());
    SimConfig four = small_config(1500.0);
    four.replicas = 4;
    four.batch_time = 100.0;
    SimConfig one = four;
    one.replicas = 1;
    one.horizon = 4.0 * (four.horizon - four.burn_in) + four.burn_in;
    const auto a = estimate_regulator_rates_with_error(run(m, four));
    const auto b = estimate_regulator_rates_with_error(run(m, one));
    for (int k = 0; k < 3; ++k) {
        CHECK(std::abs(a.rate[k] - b.rate[k]) <= a.half_width[k] + b.half_width[k]);
    }
}

TEST_CASE("block maxima are reproducible and nonnegative") {
    const auto m = validate(oracle::set_a());
    const SimConfig c = small_config();
    const auto a = block_maxima(m, c, 5.0, 10);
    const auto b = block_maxima(m, c, 5.0, 10);
    CHECK(a == b);
    for (const auto& node : a) {
        CHECK(node.size() == 10);
        for (double x : node) CHECK(x >= 0.0);
    }
}
