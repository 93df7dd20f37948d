// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tandem_tail/model.hpp"

namespace tandem::kernel {

/// Kernel restricted to a plane:
///   h(u, v) = -1/2 (a u^2 + s v^2) + p u + q v,
/// with the boundary line u = v. Tail analysis runs in the target variable v.
///
/// Node 3 uses the slice x = k1 y of the three-node kernel (u = y, v = z);
/// node 2 uses the two-node kernel of the upstream pair (u = x, v = y).
struct PlanarKernel {
    double a = 0.0;  ///< curvature in u
    double p = 0.0;  ///< linear coefficient in u
    double s = 0.0;  ///< curvature in v
    double q = 0.0;  ///< linear coefficient in v

    double h(double u, double v) const noexcept;

    /// p^2 + 2a(-s v^2 / 2 + q v): discriminant of h(., v) = 0 in u.
    double delta(double v) const noexcept;
    /// q^2 + 2s(p u - a u^2 / 2): discriminant of h(u, .) = 0 in v.
    double delta_bar(double u) const noexcept;

    /// Solutions (lower, upper) of h(u, v) = 0 in u. Throws OutsideBranchCut.
    std::pair<double, double> u_branches(double v) const;
    /// Solutions (lower, upper) of h(u, v) = 0 in v. Throws OutsideBranchCut.
    std::pair<double, double> v_branches(double u) const;

    /// Lower u-branch; callers guarantee delta(v) >= 0.
    double u_lower(double v) const;

    /// Nonzero intersection of h = 0 with u = v: 2(p + q) / (a + s).
    double diagonal_root() const noexcept;
    /// v where the lower u-branch returns to 0: 2q / s.
    double u_zero_crossing() const noexcept;
    /// Branch point v_max in closed form.
    double v_max_closed_form() const noexcept;
};

/// x = k1 y slice of the three-node kernel.
PlanarKernel node3_kernel(const ValidatedModel& model);
/// Kernel of the two-node sub-model formed by nodes 1 and 2.
PlanarKernel node2_kernel(const ValidatedModel& model);

/// H(x, y, z) of the three-node model.
double kernel_h(const ValidatedModel& model, double x, double y, double z);

enum class Regime { SimplePole, PoleAtBranch, BranchPoint };

std::string to_string(Regime regime);
Regime regime_from_string(const std::string& name);

struct KernelGeometry {
    double z_min = 0.0;
    double z_max = 0.0;
    double z_max_closed_form = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;
    double y_tilde_m = 0.0;                ///< Y_max,0(z_max)
    double z_star_candidate = 0.0;         ///< closed-form diagonal root
    std::optional<double> z_star;          ///< verified fixed point in (0, z_max]
};

struct AsymptoticPrediction {
    int node = 0;          ///< 1..3
    double alpha = 0.0;    ///< exponential decay rate
    double mu = 0.0;       ///< polynomial exponent: 0, -1/2 or -3/2
    Regime regime = Regime::SimplePole;
};

struct Options {
    /// Relative tolerance for treating the pole as sitting on the branch point.
    double tangency_tol = 1e-7;
    /// Accepted |Y_max,0(z*) - z*| / max(1, z*).
    double fixed_point_tol = 1e-9;
};

double delta(const ValidatedModel& model, double z);
std::pair<double, double> y_branches(const ValidatedModel& model, double z);
std::pair<double, double> z_branches(const ValidatedModel& model, double y);

/// Branch points of both discriminants, found by bisection with Newton polish,
/// plus the closed-form z_max and the y-tilde value. z_star fields are left
/// for z_star() to fill.
KernelGeometry branch_points(const ValidatedModel& model);

/// Candidate (v*, v_max) machinery on an arbitrary planar kernel.
struct PlanarAnalysis {
    double v_min = 0.0;
    double v_max = 0.0;
    double u_at_v_max = 0.0;
    double candidate = 0.0;
    bool existence_test = false;         ///< u_lower(v_max) >= v_max
    bool candidate_is_fixed_point = false;
    std::optional<double> v_star;
    AsymptoticPrediction prediction;
};

PlanarAnalysis analyze_planar(const PlanarKernel& k, const Options& opts = {});

std::optional<double> z_star(const ValidatedModel& model, const Options& opts = {});
AsymptoticPrediction classify_node3(const ValidatedModel& model, const Options& opts = {});
AsymptoticPrediction marginal_asymptotics(const ValidatedModel& model, int node,
                                          const Options& opts = {});

struct TauberianExponent {
    double lambda_exponent = 0.0;
    double prefactor_exponent = 0.0;
};

/// Singularity type to (transform exponent, tail prefactor exponent).
TauberianExponent tauberian_exponent(Regime regime) noexcept;

class JointTailPredictor {
public:
    JointTailPredictor() = default;
    explicit JointTailPredictor(const std::array<AsymptoticPrediction, 3>& marginals);

    const Vec3& alphas() const noexcept { return alphas_; }
    const Vec3& mus() const noexcept { return mus_; }

    /// prod x_i^mu_i exp(-alpha_i x_i), unnormalized.
    double operator()(const Vec3& point) const;
    double log_value(const Vec3& point) const;

private:
    Vec3 alphas_{};
    Vec3 mus_{};
};

JointTailPredictor joint_tail_predictor(const ValidatedModel& model, const Options& opts = {});

struct BoundaryIdentity {
    double z0 = 0.0;           ///< 2(c3 - lambda3 - c2) / sigma3^2
    double phi2_value = 0.0;   ///< c3 - lambda1 - lambda2 - lambda3
};

BoundaryIdentity boundary_identity_point(const ValidatedModel& model);

struct KernelReport {
    KernelGeometry geometry;
    std::array<AsymptoticPrediction, 3> marginals;
    BoundaryIdentity boundary;
    Vec3 regulator_rates{};
    std::vector<std::string> warnings;
};

/// Full kernel pipeline. Weak-mode models that violate the refined
/// inequalities throw UnsupportedModel.
KernelReport analyze(const ValidatedModel& model, const Options& opts = {});

}  // namespace tandem::kernel
