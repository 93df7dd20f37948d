// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>

namespace tandem {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

/// Rates and volatilities of the three-node Brownian tandem queue.
/// Index 0 is node 1. Driving Brownian motions are independent.
struct ModelParams {
    Vec3 lambda{};  ///< exogenous arrival rate per node
    Vec3 c{};       ///< service rate per node
    Vec3 sigma{};   ///< Brownian volatility per node (per sqrt-time)

    bool operator==(const ModelParams&) const = default;
};

enum class StabilityMode { Refined, Weak };

std::string to_string(StabilityMode mode);
StabilityMode stability_mode_from_string(const std::string& name);

struct DerivedConstants {
    Vec3 drift{};      ///< net-flow drift of the free process
    double k1 = 0.0;   ///< x/y ratio at the top of the kernel ellipsoid
    Mat3 reflection{}; ///< unit lower-bidiagonal reflection matrix

    bool operator==(const DerivedConstants&) const = default;
};

/// Parameters that passed validation, bundled with their derived constants.
/// Only constructible through validate().
class ValidatedModel {
public:
    const ModelParams& params() const noexcept { return params_; }
    const DerivedConstants& derived() const noexcept { return derived_; }
    StabilityMode mode() const noexcept { return mode_; }

    /// True when the refined inequalities hold (always true in refined mode).
    bool refined_stable() const noexcept { return refined_stable_; }

    /// k1 == 1 is outside the generic branch of the kernel analysis.
    bool k1_is_one() const noexcept;

    bool operator==(const ValidatedModel&) const = default;

private:
    friend ValidatedModel validate(const ModelParams&, StabilityMode);
    ValidatedModel(ModelParams p, DerivedConstants d, StabilityMode m, bool refined)
        : params_(p), derived_(d), mode_(m), refined_stable_(refined) {}

    ModelParams params_;
    DerivedConstants derived_;
    StabilityMode mode_;
    bool refined_stable_;
};

/// Validate positivity and the selected stability condition.
/// Throws InvalidParameter, UnstableModel or DegenerateK1.
ValidatedModel validate(const ModelParams& params, StabilityMode mode = StabilityMode::Refined);

/// (lambda1 - c1, lambda2 + c1 - c2, lambda3 + c2 - c3).
Vec3 net_flow_drift(const ModelParams& params);

/// (c1 - lambda1) sigma2^2 / ((c2 - lambda2 - c1) sigma1^2); throws DegenerateK1.
double geometric_ratio_k1(const ModelParams& params);

/// c_k - sum_{i<=k} lambda_i: long-run regulator rate at node k.
Vec3 regulator_rates(const ModelParams& params);

}  // namespace tandem
