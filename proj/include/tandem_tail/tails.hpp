// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "tandem_tail/kernel.hpp"
#include "tandem_tail/sim.hpp"

namespace tandem::tails {

struct Ccdf {
    std::vector<double> levels;
    std::vector<double> probabilities;  ///< P(L >= level), nonincreasing
};

/// Exceedance mass over window length at every grid level. Throws EmptyWindow.
Ccdf empirical_ccdf(const sim::StationaryAccumulator& acc, int node);

/// Smallest level whose exceedance probability is <= tail_prob.
std::optional<double> tail_quantile(const Ccdf& ccdf, double tail_prob);

struct FitWindow {
    double lo = 0.0;
    double hi = 0.0;
};

/// [q(lower), q(upper)] where q(x) is the level with CCDF first <= 1 - x.
std::optional<FitWindow> quantile_window(const Ccdf& ccdf, double lower = 0.90,
                                         double upper = 0.999);

struct TailFit {
    int node = 0;
    double alpha_hat = 0.0;
    double intercept = 0.0;
    double stderr_alpha = 0.0;
    std::optional<double> mu_hat;  ///< set only when mu was fitted
    FitWindow window;
    std::size_t n_levels = 0;
};

/// Least squares of log P(z) - mu log z on z over the window levels with
/// P > 0. With mu absent, log z enters as a second regressor.
/// Throws InsufficientTail below 5 usable levels.
TailFit fit_decay(const Ccdf& ccdf, const FitWindow& window, std::optional<double> mu,
                  int node = 0);

struct DependenceProfile {
    std::pair<int, int> pair;
    int denominator_node = 0;
    std::vector<double> levels;                ///< grid levels actually used
    std::vector<std::optional<double>> ratios; ///< absent where P(L_q >= t) == 0
};

/// P(L_i >= t, L_j >= t) / P(L_q >= t) with q = i, the lower-indexed node.
/// Each requested level snaps down to the nearest grid level.
DependenceProfile tail_dependence(const sim::StationaryAccumulator& acc, std::pair<int, int> pair,
                                  const std::vector<double>& levels);

struct FactorizationPoint {
    double tail_prob = 0.0;                ///< requested per-node exceedance probability
    std::array<double, 3> thresholds{};    ///< per-node joint-grid edges
    std::array<double, 3> marginal{};      ///< P(L_i >= threshold_i)
    double joint = 0.0;                    ///< P(L >= thresholds)
    std::optional<double> ratio;           ///< joint / prod marginal
    double predictor_log = 0.0;            ///< log of the unnormalized joint predictor
};

/// Joint CCDF over the product of marginal CCDFs at per-node thresholds whose
/// marginal exceedance is closest to each tail probability (1 gives level 0).
std::vector<FactorizationPoint> factorization_ratio(const sim::StationaryAccumulator& acc,
                                                    const kernel::JointTailPredictor& predictor,
                                                    const std::vector<double>& tail_probs);

/// Sup-distance between the moment-standardized sample of block maxima and
/// exp(-exp(-x)). Throws InsufficientBlocks below 20 blocks.
double gumbel_sup_distance(std::vector<double> maxima);

/// Block maxima of an i.i.d. stream, then gumbel_sup_distance.
double gumbel_block_maxima(const std::function<double()>& next_sample, std::size_t block_size,
                           std::size_t n_blocks);

/// Block maxima of one node of the simulated process, then gumbel_sup_distance.
double gumbel_block_maxima(const ValidatedModel& model, const sim::SimConfig& config, int node,
                           double block_time, int n_blocks);

}  // namespace tandem::tails
