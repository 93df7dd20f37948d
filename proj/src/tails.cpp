// SPDX-License-Identifier: Apache-2.0
#include "tandem_tail/tails.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "tandem_tail/errors.hpp"

namespace tandem::tails {

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

double as_prob(std::uint64_t count, std::uint64_t total) {
    return static_cast<double>(count) / static_cast<double>(total);
}

}  // namespace

Ccdf empirical_ccdf(const sim::StationaryAccumulator& acc, int node) {
    if (acc.steps() == 0) throw EmptyWindow("empty accumulation window");
    Ccdf out;
    out.levels = acc.grid().levels();
    const auto counts = acc.exceedance_counts(node);
    out.probabilities.reserve(counts.size());
    for (auto c : counts) out.probabilities.push_back(as_prob(c, acc.steps()));
    return out;
}

std::optional<double> tail_quantile(const Ccdf& ccdf, double tail_prob) {
    for (std::size_t k = 0; k < ccdf.levels.size(); ++k) {
        if (ccdf.probabilities[k] <= tail_prob) return ccdf.levels[k];
    }
    return std::nullopt;
}

std::optional<FitWindow> quantile_window(const Ccdf& ccdf, double lower, double upper) {
    const auto lo = tail_quantile(ccdf, 1.0 - lower);
    const auto hi = tail_quantile(ccdf, 1.0 - upper);
    if (!lo || !hi || !(*lo < *hi)) return std::nullopt;
    return FitWindow{*lo, *hi};
}

TailFit fit_decay(const Ccdf& ccdf, const FitWindow& window, std::optional<double> mu, int node) {
    std::vector<double> z;
    std::vector<double> y;
    for (std::size_t k = 0; k < ccdf.levels.size(); ++k) {
        const double level = ccdf.levels[k];
        const double prob = ccdf.probabilities[k];
        if (level < window.lo || level > window.hi || !(prob > 0.0)) continue;
        const bool needs_log = !mu.has_value() || *mu != 0.0;
        if (needs_log && !(level > 0.0)) continue;
        z.push_back(level);
        y.push_back(std::log(prob) - (mu && *mu != 0.0 ? *mu * std::log(level) : 0.0));
    }
    if (z.size() < 5) {
        throw InsufficientTail("fit window holds " + std::to_string(z.size()) +
                               " positive-probability levels; need at least 5");
    }

    const auto n = static_cast<Eigen::Index>(z.size());
    const Eigen::Index cols = mu ? 2 : 3;
    Eigen::MatrixXd design(n, cols);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        design(i, 0) = 1.0;
        design(i, 1) = z[static_cast<std::size_t>(i)];
        if (!mu) design(i, 2) = std::log(z[static_cast<std::size_t>(i)]);
        rhs(i) = y[static_cast<std::size_t>(i)];
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    const Eigen::VectorXd beta = qr.solve(rhs);
    const Eigen::VectorXd resid = rhs - design * beta;
    const double dof = static_cast<double>(n - cols);
    const double sigma2 = dof > 0.0 ? resid.squaredNorm() / dof : 0.0;
    const Eigen::MatrixXd cov = sigma2 * (design.transpose() * design).inverse();

    TailFit fit;
    fit.node = node;
    fit.intercept = beta(0);
    fit.alpha_hat = -beta(1);
    fit.stderr_alpha = std::sqrt(std::max(0.0, cov(1, 1)));
    if (!mu) fit.mu_hat = beta(2);
    fit.window = window;
    fit.n_levels = z.size();
    return fit;
}

DependenceProfile tail_dependence(const sim::StationaryAccumulator& acc, std::pair<int, int> pair,
                                  const std::vector<double>& levels) {
    if (acc.steps() == 0) throw EmptyWindow("empty accumulation window");
    const int index = sim::pair_index(pair.first, pair.second);
    DependenceProfile out;
    out.pair = {std::min(pair.first, pair.second), std::max(pair.first, pair.second)};
    out.denominator_node = out.pair.first;
    for (double t : levels) {
        const auto bin = std::max<std::ptrdiff_t>(0, acc.grid().bin_of(t));
        const auto k = static_cast<std::size_t>(bin);
        out.levels.push_back(acc.grid()[k]);
        const auto denom = acc.exceedance_count(out.denominator_node, k);
        if (denom == 0) {
            out.ratios.emplace_back(std::nullopt);
            continue;
        }
        out.ratios.emplace_back(as_prob(acc.pair_exceedance_count(index, k), denom));
    }
    return out;
}

std::vector<FactorizationPoint> factorization_ratio(const sim::StationaryAccumulator& acc,
                                                    const kernel::JointTailPredictor& predictor,
                                                    const std::vector<double>& tail_probs) {
    if (acc.steps() == 0) throw EmptyWindow("empty accumulation window");
    const int bins = acc.joint_bins();
    std::array<std::vector<double>, 3> marginal;
    for (int node = 1; node <= 3; ++node) {
        auto& m = marginal[node - 1];
        m.resize(static_cast<std::size_t>(bins));
        for (int e = 0; e < bins; ++e) {
            m[static_cast<std::size_t>(e)] = as_prob(acc.joint_marginal_count(node, e), acc.steps());
        }
    }

    std::vector<FactorizationPoint> out;
    for (double p : tail_probs) {
        FactorizationPoint pt;
        pt.tail_prob = p;
        std::array<int, 3> edges{};
        bool resolvable = true;
        for (int i = 0; i < 3; ++i) {
            int best = 0;
            double best_gap = std::abs(std::log(marginal[i][0] / p));
            for (int e = 1; e < bins; ++e) {
                const double prob = marginal[i][static_cast<std::size_t>(e)];
                if (!(prob > 0.0)) break;
                const double gap = std::abs(std::log(prob / p));
                if (gap < best_gap) {
                    best = e;
                    best_gap = gap;
                }
            }
            edges[i] = best;
            pt.thresholds[i] = acc.joint_edge(i + 1, best);
            pt.marginal[i] = marginal[i][static_cast<std::size_t>(best)];
            resolvable = resolvable && pt.marginal[i] > 0.0;
        }
        pt.joint = as_prob(acc.joint_exceedance_count(edges), acc.steps());
        if (resolvable) pt.ratio = pt.joint / (pt.marginal[0] * pt.marginal[1] * pt.marginal[2]);
        pt.predictor_log = predictor.log_value(pt.thresholds);
        out.push_back(pt);
    }
    return out;
}

double gumbel_sup_distance(std::vector<double> maxima) {
    if (maxima.size() < 20) {
        throw InsufficientBlocks("need at least 20 blocks, got " + std::to_string(maxima.size()));
    }
    const auto n = static_cast<double>(maxima.size());
    double mean = 0.0;
    for (double m : maxima) mean += m;
    mean /= n;
    double ss = 0.0;
    for (double m : maxima) ss += (m - mean) * (m - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0)) return 1.0;
    // Gumbel moments: mean = loc + gamma beta, sd = beta pi / sqrt 6.
    const double beta = sd * std::sqrt(6.0) / std::numbers::pi;
    const double loc = mean - kEulerGamma * beta;

    std::sort(maxima.begin(), maxima.end());
    double sup = 0.0;
    for (std::size_t i = 0; i < maxima.size(); ++i) {
        const double x = (maxima[i] - loc) / beta;
        const double cdf = std::exp(-std::exp(-x));
        const double above = static_cast<double>(i + 1) / n - cdf;
        const double below = cdf - static_cast<double>(i) / n;
        sup = std::max({sup, above, below});
    }
    return sup;
}

double gumbel_block_maxima(const std::function<double()>& next_sample, std::size_t block_size,
                           std::size_t n_blocks) {
    if (n_blocks < 20) {
        throw InsufficientBlocks("need at least 20 blocks, got " + std::to_string(n_blocks));
    }
    if (block_size == 0) throw InvalidParameter("block_size must be > 0");
    std::vector<double> maxima;
    maxima.reserve(n_blocks);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        double best = next_sample();
        for (std::size_t i = 1; i < block_size; ++i) best = std::max(best, next_sample());
        maxima.push_back(best);
    }
    return gumbel_sup_distance(std::move(maxima));
}

double gumbel_block_maxima(const ValidatedModel& model, const sim::SimConfig& config, int node,
                           double block_time, int n_blocks) {
    if (node < 1 || node > 3) throw InvalidParameter("node must be 1, 2 or 3");
    if (n_blocks < 20) {
        throw InsufficientBlocks("need at least 20 blocks, got " + std::to_string(n_blocks));
    }
    auto maxima = sim::block_maxima(model, config, block_time, n_blocks);
    return gumbel_sup_distance(std::move(maxima[static_cast<std::size_t>(node - 1)]));
}

}  // namespace tandem::tails
