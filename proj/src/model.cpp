// SPDX-License-Identifier: Apache-2.0
#include "tandem_tail/model.hpp"

#include <cmath>
#include <sstream>

#include "tandem_tail/errors.hpp"

namespace tandem {

namespace {

std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void require_positive(const Vec3& v, const char* name) {
    for (int i = 0; i < 3; ++i) {
        if (!std::isfinite(v[i]) || !(v[i] > 0.0)) {
            throw InvalidParameter(std::string(name) + std::to_string(i + 1) +
                                   " must be finite and > 0 (got " + fmt_num(v[i]) + ")");
        }
    }
}

// First refined inequality that fails, or empty.
std::string refined_violation(const ModelParams& p) {
    if (!(p.lambda[0] < p.c[0])) {
        return "lambda1 < c1 violated (" + fmt_num(p.lambda[0]) + " >= " + fmt_num(p.c[0]) + ")";
    }
    for (int i = 1; i < 3; ++i) {
        const double lhs = p.lambda[i] + p.c[i - 1];
        if (!(lhs < p.c[i])) {
            const auto k = std::to_string(i + 1);
            const auto km1 = std::to_string(i);
            return "lambda" + k + " + c" + km1 + " < c" + k + " violated (" + fmt_num(lhs) +
                   " >= " + fmt_num(p.c[i]) + ")";
        }
    }
    return {};
}

std::string weak_violation(const ModelParams& p) {
    double cumulative = 0.0;
    for (int k = 0; k < 3; ++k) {
        cumulative += p.lambda[k];
        if (!(cumulative < p.c[k])) {
            std::string lhs = "lambda1";
            for (int i = 1; i <= k; ++i) lhs += " + lambda" + std::to_string(i + 1);
            return lhs + " < c" + std::to_string(k + 1) + " violated (" + fmt_num(cumulative) +
                   " >= " + fmt_num(p.c[k]) + ")";
        }
    }
    return {};
}

}  // namespace

std::string to_string(StabilityMode mode) {
    return mode == StabilityMode::Refined ? "refined" : "weak";
}

StabilityMode stability_mode_from_string(const std::string& name) {
    if (name == "refined") return StabilityMode::Refined;
    if (name == "weak") return StabilityMode::Weak;
    throw InvalidParameter("unknown stability mode '" + name + "' (expected refined or weak)");
}

bool ValidatedModel::k1_is_one() const noexcept {
    return std::abs(derived_.k1 - 1.0) <= 1e-12;
}

Vec3 net_flow_drift(const ModelParams& p) {
    return {p.lambda[0] - p.c[0], p.lambda[1] + p.c[0] - p.c[1], p.lambda[2] + p.c[1] - p.c[2]};
}

double geometric_ratio_k1(const ModelParams& p) {
    const double denom_rate = p.c[1] - p.lambda[1] - p.c[0];
    if (denom_rate == 0.0) {
        throw DegenerateK1("c2 - lambda2 - c1 == 0: k1 is undefined");
    }
    return (p.c[0] - p.lambda[0]) * p.sigma[1] * p.sigma[1] /
           (denom_rate * p.sigma[0] * p.sigma[0]);
}

Vec3 regulator_rates(const ModelParams& p) {
    Vec3 out{};
    double cumulative = 0.0;
    for (int k = 0; k < 3; ++k) {
        cumulative += p.lambda[k];
        out[k] = p.c[k] - cumulative;
    }
    return out;
}

ValidatedModel validate(const ModelParams& params, StabilityMode mode) {
    require_positive(params.lambda, "lambda");
    require_positive(params.c, "c");
    require_positive(params.sigma, "sigma");

    const std::string refined = refined_violation(params);
    if (mode == StabilityMode::Refined && !refined.empty()) throw UnstableModel(refined);
    if (mode == StabilityMode::Weak) {
        const std::string weak = weak_violation(params);
        if (!weak.empty()) throw UnstableModel(weak);
    }

    DerivedConstants d;
    d.drift = net_flow_drift(params);
    d.k1 = geometric_ratio_k1(params);
    d.reflection = {{{1.0, 0.0, 0.0}, {-1.0, 1.0, 0.0}, {0.0, -1.0, 1.0}}};
    return ValidatedModel(params, d, mode, refined.empty());
}

}  // namespace tandem
