// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include "doctest.h"
#include "tandem_tail/errors.hpp"
#include "tandem_tail/tails.hpp"

using namespace tandem;
using namespace tandem::tails;

namespace {

Ccdf synthetic(double alpha, double mu, double c, double step, int n) {
    Ccdf out;
    for (int k = 0; k < n; ++k) {
        const double z = step * k;
        out.levels.push_back(z);
        out.probabilities.push_back(k == 0 ? 1.0 : std::min(1.0, c * std::pow(z, mu) * std::exp(-alpha * z)));
    }
    return out;
}

sim::StationaryAccumulator accumulator(std::size_t levels = 400) {
    return sim::StationaryAccumulator(sim::LevelGrid::uniform(0.02, levels), 1.0, 16,
                                      {8.0, 8.0, 8.0}, {});
}

}  // namespace

TEST_CASE("exact exponential tail is recovered") {
    const auto c = synthetic(1.7, 0.0, 0.8, 0.05, 200);
    const FitWindow w{1.0, 6.0};
    const auto f = fit_decay(c, w, 0.0, 3);
    CHECK(f.alpha_hat == doctest::Approx(1.7).epsilon(1e-10));
    CHECK(f.intercept == doctest::Approx(std::log(0.8)).epsilon(1e-10));
    CHECK(f.stderr_alpha < 1e-8);
    CHECK(f.node == 3);
    CHECK_FALSE(f.mu_hat.has_value());
    CHECK(f.n_levels == 101);
}

TEST_CASE("polynomial prefactor is compensated") {
    for (double mu : {-0.5, -1.5}) {
        const auto c = synthetic(0.9, mu, 0.3, 0.05, 300);
        const FitWindow w{2.0, 12.0};
        CHECK(fit_decay(c, w, mu).alpha_hat == doctest::Approx(0.9).epsilon(1e-10));
        // Ignoring the prefactor biases the slope upward.
        CHECK(fit_decay(c, w, 0.0).alpha_hat > 0.9);
        const auto free = fit_decay(c, w, std::nullopt);
        REQUIRE(free.mu_hat.has_value());
        CHECK(*free.mu_hat == doctest::Approx(mu).epsilon(1e-8));
        CHECK(free.alpha_hat == doctest::Approx(0.9).epsilon(1e-8));
    }
}

TEST_CASE("quantile window") {
    const auto c = synthetic(1.0, 0.0, 1.0, 0.01, 1000);
    const auto q = tail_quantile(c, 0.1);
    REQUIRE(q.has_value());
    CHECK(*q == doctest::Approx(std::log(10.0)).epsilon(0.01 / std::log(10.0)));
    const auto w = quantile_window(c);
    REQUIRE(w.has_value());
    CHECK(w->lo == doctest::Approx(std::log(10.0)).epsilon(0.005));
    CHECK(w->hi == doctest::Approx(std::log(1000.0)).epsilon(0.005));
    CHECK_FALSE(tail_quantile(c, 1e-9).has_value());
    CHECK_FALSE(quantile_window(c, 0.9, 1.0 - 1e-9).has_value());
}

TEST_CASE("too few levels") {
    const auto c = synthetic(1.0, 0.0, 1.0, 1.0, 20);
    CHECK_THROWS_AS(fit_decay(c, FitWindow{2.0, 5.0}, 0.0), InsufficientTail);
    CHECK_NOTHROW(fit_decay(c, FitWindow{2.0, 6.0}, 0.0));
}

TEST_CASE("empirical ccdf from an accumulator") {
    auto acc = accumulator(10);
    acc.record({0.0, 0.0, 0.0});
    acc.record({0.05, 0.0, 0.0});
    acc.record({0.1, 0.0, 0.0});
    acc.record({0.5, 0.0, 0.0});
    const auto c = empirical_ccdf(acc, 1);
    CHECK(c.probabilities[0] == 1.0);
    CHECK(c.probabilities[1] == 0.75);
    CHECK(c.probabilities[3] == 0.5);
    CHECK(c.probabilities[9] == 0.25);
    CHECK_THROWS_AS(empirical_ccdf(accumulator(), 1), EmptyWindow);
}

TEST_CASE("comonotone pair has dependence ratio one") {
    auto acc = accumulator();
    std::mt19937_64 rng(5);
    std::exponential_distribution<double> e(1.0);
    for (int i = 0; i < 20000; ++i) {
        const double x = e(rng);
        acc.record({x, x, e(rng)});
    }
    const auto prof = tail_dependence(acc, {1, 2}, {0.5, 1.0, 2.0, 3.0, 4.0});
    CHECK(prof.denominator_node == 1);
    for (const auto& r : prof.ratios) {
        REQUIRE(r.has_value());
        CHECK(*r == doctest::Approx(1.0).epsilon(1e-12));
    }

    // Independent pair: ratio tracks the other marginal.
    const auto ind = tail_dependence(acc, {3, 1}, {0.5, 1.0, 2.0});
    CHECK(ind.pair == std::pair<int, int>{1, 3});
    const double t[] = {0.5, 1.0, 2.0};
    for (int k = 0; k < 3; ++k) {
        REQUIRE(ind.ratios[k].has_value());
        CHECK(std::abs(*ind.ratios[k] - std::exp(-t[k])) < 0.03);
    }
}

TEST_CASE("dependence levels snap down to the grid") {
    auto acc = accumulator(10);
    acc.record({0.1, 0.1, 0.1});
    const auto prof = tail_dependence(acc, {1, 2}, {0.05, 0.5, -1.0});
    CHECK(prof.levels[0] == doctest::Approx(0.04));
    CHECK(prof.levels[1] == doctest::Approx(0.18));
    CHECK(prof.levels[2] == 0.0);
    CHECK(prof.ratios[0].value() == 1.0);
    CHECK_FALSE(prof.ratios[1].has_value());
}

TEST_CASE("factorization ratio") {
    auto acc = accumulator();
    std::mt19937_64 rng(9);
    std::exponential_distribution<double> e(1.0);
    for (int i = 0; i < 400000; ++i) acc.record({e(rng), e(rng), e(rng)});
    const kernel::JointTailPredictor pred(
        {kernel::AsymptoticPrediction{1, 1.0, 0.0, kernel::Regime::SimplePole},
         kernel::AsymptoticPrediction{2, 1.0, 0.0, kernel::Regime::SimplePole},
         kernel::AsymptoticPrediction{3, 1.0, 0.0, kernel::Regime::SimplePole}});
    const auto pts = factorization_ratio(acc, pred, {1.0, 0.3, 0.1});
    REQUIRE(pts.size() == 3);
    CHECK(pts[0].ratio.value() == 1.0);
    CHECK(pts[0].thresholds == Vec3{});
    for (int k = 1; k < 3; ++k) {
        REQUIRE(pts[k].ratio.has_value());
        CHECK(*pts[k].ratio == doctest::Approx(1.0).epsilon(0.2));
        for (double m : pts[k].marginal) CHECK(std::abs(std::log(m / pts[k].tail_prob)) < 0.3);
    }
    CHECK(pts[1].predictor_log == doctest::Approx(-(pts[1].thresholds[0] + pts[1].thresholds[1] +
                                                   pts[1].thresholds[2])));

    // Comonotone triple: joint equals the common marginal, ratio ~ 1 / p^2.
    auto co = accumulator();
    for (int i = 0; i < 50000; ++i) {
        const double x = e(rng);
        co.record({x, x, x});
    }
    const auto c = factorization_ratio(co, pred, {0.1});
    CHECK(*c[0].ratio > 50.0);
}

TEST_CASE("Gumbel domain of i.i.d. exponentials") {
    std::mt19937_64 rng(1);
    std::exponential_distribution<double> e(1.0);
    const double d = gumbel_block_maxima([&] { return e(rng); }, 1000, 400);
    CHECK(d < 0.06);
    CHECK_THROWS_AS(gumbel_block_maxima([&] { return e(rng); }, 10, 19), InsufficientBlocks);
    CHECK_THROWS_AS(gumbel_sup_distance(std::vector<double>(19, 1.0)), InsufficientBlocks);
}

TEST_CASE("Gumbel distance of exact Gumbel draws and of a uniform sample") {
    std::mt19937_64 rng(2);
    std::extreme_value_distribution<double> g(3.0, 0.5);
    std::vector<double> xs(2000);
    for (auto& x : xs) x = g(rng);
    CHECK(gumbel_sup_distance(xs) < 0.03);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& x : xs) x = u(rng);
    CHECK(gumbel_sup_distance(xs) > 0.03);
}
