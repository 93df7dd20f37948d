// SPDX-License-Identifier: Apache-2.0
#include "tandem_tail/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "tandem_tail/errors.hpp"

namespace tandem::pipeline {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_error(double estimated, double predicted) {
    return std::abs(estimated - predicted) / std::abs(predicted);
}

Row relative_row(std::string quantity, double predicted, double estimated, double tol) {
    const bool pass = std::isfinite(estimated) && rel_error(estimated, predicted) <= tol;
    return {std::move(quantity), predicted, estimated, tol, pass};
}

Row upper_row(std::string quantity, double predicted, double estimated, double limit) {
    return {std::move(quantity), predicted, estimated, limit,
            std::isfinite(estimated) && estimated <= limit};
}

}  // namespace

bool VerificationReport::all_pass() const noexcept {
    if (rows.empty()) return false;
    for (const auto& r : rows) {
        if (!r.pass) return false;
    }
    return true;
}

const Row* VerificationReport::find(const std::string& quantity) const noexcept {
    for (const auto& r : rows) {
        if (r.quantity == quantity) return &r;
    }
    return nullptr;
}

std::vector<double> dependence_levels(const tails::Ccdf& denominator,
                                      const std::vector<double>& tail_probs) {
    std::vector<double> out;
    for (double p : tail_probs) {
        const auto q = tails::tail_quantile(denominator, p);
        if (!q) continue;
        if (!out.empty() && !(*q > out.back())) continue;
        out.push_back(*q);
    }
    return out;
}

bool asymptotically_independent(const tails::DependenceProfile& profile, std::size_t count,
                                double limit) {
    std::vector<double> resolved;
    for (const auto& r : profile.ratios) {
        if (r) resolved.push_back(*r);
    }
    if (resolved.size() < count || count == 0) return false;
    for (std::size_t i = resolved.size() - count + 1; i < resolved.size(); ++i) {
        if (resolved[i] > resolved[i - 1]) return false;
    }
    return resolved.back() < limit;
}

Products simulate(const config::RunManifest& manifest, bool with_gumbel) {
    Products out;
    out.manifest = manifest;
    const auto model = validate(manifest.model, manifest.mode);
    out.sim = config::resolved_sim(manifest);
    if (model.refined_stable()) out.kernel = kernel::analyze(model);

    const auto t0 = std::chrono::steady_clock::now();
    out.acc = sim::run(model, out.sim);
    out.sim_seconds = seconds_since(t0);

    out.rates = sim::estimate_regulator_rates_with_error(out.acc);
    out.boundary_transform = sim::estimate_boundary_transform(out.acc, 2);
    for (int node = 1; node <= 3; ++node) {
        auto& c = out.ccdf[node - 1];
        c = tails::empirical_ccdf(out.acc, node);
        const auto window = tails::quantile_window(c, manifest.fit.window_lower,
                                                   manifest.fit.window_upper);
        const double mu = out.kernel ? out.kernel->marginals[node - 1].mu : 0.0;
        if (window) {
            try {
                out.fits[node - 1] = tails::fit_decay(c, *window, mu, node);
            } catch (const InsufficientTail&) {
            }
        }
    }
    for (std::size_t k = 0; k < sim::kPairs.size(); ++k) {
        const auto [i, j] = sim::kPairs[k];
        const auto levels = dependence_levels(out.ccdf[i - 1], manifest.fit.dependence_tail_probs);
        out.dependence[k] = tails::tail_dependence(out.acc, {i, j}, levels);
    }
    kernel::JointTailPredictor predictor;
    if (out.kernel) predictor = kernel::JointTailPredictor(out.kernel->marginals);
    std::vector<double> probs = manifest.fit.factorization_tail_probs;
    probs.push_back(manifest.fit.factorization_target);
    out.factorization = tails::factorization_ratio(out.acc, predictor, probs);

    if (with_gumbel) {
        const auto t1 = std::chrono::steady_clock::now();
        out.gumbel_distance = tails::gumbel_block_maxima(
            model, out.sim, 1, manifest.fit.gumbel_block_time, manifest.fit.gumbel_blocks);
        out.gumbel_seconds = seconds_since(t1);
    }
    return out;
}

VerificationReport evaluate(const Products& products, const VerifyOptions& options) {
    VerificationReport rep;
    rep.manifest_hash = config::manifest_hash_hex(products.manifest);
    if (!products.kernel) {
        throw UnsupportedModel("verification needs the kernel predictions of a refined-stable model");
    }
    const auto& kr = *products.kernel;
    const auto model = validate(products.manifest.model, products.manifest.mode);
    const auto k3 = kernel::node3_kernel(model);
    const auto planar = kernel::analyze_planar(k3);
    auto& rows = rep.rows;

    const double dscale = std::max(1.0, k3.p * k3.p);
    rows.push_back(upper_row("kernel.delta_at_z_min", 0.0,
                             std::abs(k3.delta(kr.geometry.z_min)) / dscale, 1e-10));
    rows.push_back(upper_row("kernel.delta_at_z_max", 0.0,
                             std::abs(k3.delta(kr.geometry.z_max)) / dscale, 1e-10));
    rows.push_back(relative_row("kernel.z_max_closed_form", kr.geometry.z_max_closed_form,
                                kr.geometry.z_max, 1e-10));

    const bool tangent = planar.prediction.regime == kernel::Regime::PoleAtBranch;
    rows.push_back({"classification.existence_vs_fixed_point", 1.0,
                    tangent || planar.existence_test == planar.candidate_is_fixed_point ? 1.0 : 0.0,
                    0.0, tangent || planar.existence_test == planar.candidate_is_fixed_point});
    if (kr.geometry.z_star && planar.prediction.regime == kernel::Regime::SimplePole) {
        const double zs = *kr.geometry.z_star;
        const double gap = std::abs(k3.u_lower(zs) - zs);
        rows.push_back(upper_row("classification.fixed_point_residual", 0.0, gap, 1e-9));
    }

    for (int k = 0; k < 3; ++k) {
        rows.push_back(relative_row("regulator_rate." + std::to_string(k + 1), kr.regulator_rates[k],
                                    products.rates.rate[k], 0.02));
    }
    rows.push_back(relative_row("boundary_transform.phi2", kr.boundary.phi2_value,
                                products.boundary_transform, 0.05));

    const double nan = std::nan("");
    const auto& f1 = products.fits[0];
    rows.push_back(relative_row("decay_rate.alpha1", kr.marginals[0].alpha,
                                f1 ? f1->alpha_hat : nan, 0.05));
    const auto& f3 = products.fits[2];
    rows.push_back(relative_row("decay_rate.alpha3", kr.marginals[2].alpha * options.alpha3_scale,
                                f3 ? f3->alpha_hat : nan, 0.10));

    for (std::size_t k = 0; k < sim::kPairs.size(); ++k) {
        const auto& prof = products.dependence[k];
        double last = nan;
        for (const auto& r : prof.ratios) {
            if (r) last = *r;
        }
        const std::string name = "dependence." + std::to_string(sim::kPairs[k][0]) +
                                 std::to_string(sim::kPairs[k][1]);
        rows.push_back({name, 0.0, last, 0.05, asymptotically_independent(prof, 3, 0.05)});
    }

    const double target = products.manifest.fit.factorization_target;
    for (const auto& pt : products.factorization) {
        if (pt.tail_prob == 1.0) {
            const double r = pt.ratio.value_or(nan);
            rows.push_back({"factorization.level0", 1.0, r, 0.0, r == 1.0});
            break;
        }
    }
    for (const auto& pt : products.factorization) {
        if (pt.tail_prob == target) {
            const double r = pt.ratio.value_or(nan);
            // Tolerance is a multiplicative band [1/2, 2].
            rows.push_back({"factorization.target", 1.0, r, 2.0,
                            std::isfinite(r) && r >= 0.5 && r <= 2.0});
            break;
        }
    }

    if (products.gumbel_distance) {
        const double d = *products.gumbel_distance;
        rows.push_back({"gumbel.node1_sup_distance", 0.0, d, 0.1, d < 0.1});
    }
    return rep;
}

}  // namespace tandem::pipeline
