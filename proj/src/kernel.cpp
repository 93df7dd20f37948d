// SPDX-License-Identifier: Apache-2.0
#include "tandem_tail/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tandem_tail/errors.hpp"
#include "tandem_tail/roots.hpp"

namespace tandem::kernel {

namespace {

// Rounding slack when a discriminant is evaluated at a computed branch point.
constexpr double kCutSlack = 1e-12;

double clamp_discriminant(double value, double scale, const char* what, double at) {
    if (value >= 0.0) return value;
    if (value >= -kCutSlack * scale) return 0.0;
    std::ostringstream os;
    os.precision(17);
    os << what << " < 0 at " << at << " (" << value << "): outside the branch cut";
    throw OutsideBranchCut(os.str());
}

double delta_scale(const PlanarKernel& k, double v) {
    return k.p * k.p + std::abs(2.0 * k.a * k.q * v) + k.a * k.s * v * v;
}

double delta_bar_scale(const PlanarKernel& k, double u) {
    return k.q * k.q + std::abs(2.0 * k.s * k.p * u) + k.s * k.a * u * u;
}

// Grow an interval from the origin until the downward parabola f changes sign.
template <class F>
double find_sign_change(F&& f, double start, double direction) {
    double x = direction * start;
    for (int i = 0; i < 2048 && f(x) > 0.0; ++i) x *= 2.0;
    return x;
}

struct QuadraticRoots {
    double lower;
    double upper;
};

// Roots of the downward parabola f(x) = c0 + c1 x - c2 x^2 with c0 > 0, c2 > 0.
QuadraticRoots parabola_roots(double c0, double c1, double c2) {
    auto f = [=](double x) { return c0 + (c1 - c2 * x) * x; };
    auto df = [=](double x) { return c1 - 2.0 * c2 * x; };
    const double start = std::max(1.0, std::abs(c1) / c2);
    const double hi = find_sign_change(f, start, 1.0);
    const double lo = find_sign_change(f, start, -1.0);
    return {roots::bisect_newton(f, df, lo, 0.0).x, roots::bisect_newton(f, df, 0.0, hi).x};
}

}  // namespace

double PlanarKernel::h(double u, double v) const noexcept {
    return -0.5 * (a * u * u + s * v * v) + p * u + q * v;
}

double PlanarKernel::delta(double v) const noexcept {
    return p * p + 2.0 * a * (-0.5 * s * v * v + q * v);
}

double PlanarKernel::delta_bar(double u) const noexcept {
    return q * q + 2.0 * s * (p * u - 0.5 * a * u * u);
}

double PlanarKernel::u_lower(double v) const {
    const double d = clamp_discriminant(delta(v), delta_scale(*this, v), "delta", v);
    // (p - sqrt(d)) / a without cancellation near d = p^2.
    return v * (s * v - 2.0 * q) / (p + std::sqrt(d));
}

std::pair<double, double> PlanarKernel::u_branches(double v) const {
    const double d = clamp_discriminant(delta(v), delta_scale(*this, v), "delta", v);
    const double root = std::sqrt(d);
    return {v * (s * v - 2.0 * q) / (p + root), (p + root) / a};
}

std::pair<double, double> PlanarKernel::v_branches(double u) const {
    const double d = clamp_discriminant(delta_bar(u), delta_bar_scale(*this, u), "delta_bar", u);
    const double root = std::sqrt(d);
    return {u * (a * u - 2.0 * p) / (q + root), (q + root) / s};
}

double PlanarKernel::diagonal_root() const noexcept {
    return 2.0 * (p + q) / (a + s);
}

double PlanarKernel::u_zero_crossing() const noexcept {
    return 2.0 * q / s;
}

double PlanarKernel::v_max_closed_form() const noexcept {
    return q / s + std::sqrt(a * a * q * q + s * a * p * p) / (s * a);
}

PlanarKernel node3_kernel(const ValidatedModel& model) {
    const auto& m = model.params();
    const double k1 = model.derived().k1;
    PlanarKernel k;
    k.a = m.sigma[0] * m.sigma[0] * k1 * k1 + m.sigma[1] * m.sigma[1];
    k.p = (m.c[0] - m.lambda[0]) * k1 + (m.c[1] - m.lambda[1] - m.c[0]);
    k.s = m.sigma[2] * m.sigma[2];
    k.q = m.c[2] - m.lambda[2] - m.c[1];
    return k;
}

PlanarKernel node2_kernel(const ValidatedModel& model) {
    const auto& m = model.params();
    PlanarKernel k;
    k.a = m.sigma[0] * m.sigma[0];
    k.p = m.c[0] - m.lambda[0];
    k.s = m.sigma[1] * m.sigma[1];
    k.q = m.c[1] - m.lambda[1] - m.c[0];
    return k;
}

double kernel_h(const ValidatedModel& model, double x, double y, double z) {
    const auto& m = model.params();
    return -0.5 * (m.sigma[0] * m.sigma[0] * x * x + m.sigma[1] * m.sigma[1] * y * y +
                   m.sigma[2] * m.sigma[2] * z * z) +
           (m.c[0] - m.lambda[0]) * x + (m.c[1] - m.lambda[1] - m.c[0]) * y +
           (m.c[2] - m.lambda[2] - m.c[1]) * z;
}

std::string to_string(Regime regime) {
    switch (regime) {
        case Regime::SimplePole: return "SimplePole";
        case Regime::PoleAtBranch: return "PoleAtBranch";
        case Regime::BranchPoint: return "BranchPoint";
    }
    return "?";
}

Regime regime_from_string(const std::string& name) {
    if (name == "SimplePole") return Regime::SimplePole;
    if (name == "PoleAtBranch") return Regime::PoleAtBranch;
    if (name == "BranchPoint") return Regime::BranchPoint;
    throw InvalidParameter("unknown regime '" + name + "'");
}

double delta(const ValidatedModel& model, double z) {
    return node3_kernel(model).delta(z);
}

std::pair<double, double> y_branches(const ValidatedModel& model, double z) {
    return node3_kernel(model).u_branches(z);
}

std::pair<double, double> z_branches(const ValidatedModel& model, double y) {
    return node3_kernel(model).v_branches(y);
}

PlanarAnalysis analyze_planar(const PlanarKernel& k, const Options& opts) {
    PlanarAnalysis out;
    const auto v_roots = parabola_roots(k.p * k.p, 2.0 * k.a * k.q, k.a * k.s);
    out.v_min = v_roots.lower;
    out.v_max = v_roots.upper;
    out.u_at_v_max = k.p / k.a;
    out.candidate = k.diagonal_root();
    out.existence_test = out.u_at_v_max >= out.v_max;

    const double scale = std::max(1.0, out.candidate);
    if (out.candidate > 0.0 &&
        k.delta(out.candidate) >= -kCutSlack * delta_scale(k, out.candidate)) {
        const double gap = std::abs(k.u_lower(out.candidate) - out.candidate);
        out.candidate_is_fixed_point = gap <= opts.fixed_point_tol * scale;
    }

    const double tangency = opts.tangency_tol * std::max(1.0, out.v_max);
    if (std::abs(out.candidate - out.v_max) <= tangency) {
        out.v_star = std::min(out.candidate, out.v_max);
        out.prediction = {0, out.v_max, -0.5, Regime::PoleAtBranch};
        return out;
    }

    if (out.existence_test) {
        // The lower branch starts below the diagonal at 2q/s (where it is 0)
        // and ends above it at v_max.
        auto g = [&](double v) { return k.u_lower(v) - v; };
        auto dg = [&](double v) {
            const double d = k.delta(v);
            return d > 0.0 ? (k.s * v - k.q) / std::sqrt(d) - 1.0 : 0.0;
        };
        const auto r = roots::bisect_newton(g, dg, k.u_zero_crossing(), out.v_max);
        const double root = r.x;
        if (std::abs(g(root)) <= opts.fixed_point_tol * std::max(1.0, root)) {
            out.v_star = root;
            out.prediction = {0, root, 0.0, Regime::SimplePole};
            return out;
        }
    }
    out.prediction = {0, out.v_max, -1.5, Regime::BranchPoint};
    return out;
}

KernelGeometry branch_points(const ValidatedModel& model) {
    const PlanarKernel k = node3_kernel(model);
    KernelGeometry g;
    const auto z_roots = parabola_roots(k.p * k.p, 2.0 * k.a * k.q, k.a * k.s);
    g.z_min = z_roots.lower;
    g.z_max = z_roots.upper;
    g.z_max_closed_form = k.v_max_closed_form();
    const auto y_roots = parabola_roots(k.q * k.q, 2.0 * k.s * k.p, k.s * k.a);
    g.y_min = y_roots.lower;
    g.y_max = y_roots.upper;
    g.y_tilde_m = k.p / k.a;
    g.z_star_candidate = k.diagonal_root();
    return g;
}

std::optional<double> z_star(const ValidatedModel& model, const Options& opts) {
    return analyze_planar(node3_kernel(model), opts).v_star;
}

AsymptoticPrediction classify_node3(const ValidatedModel& model, const Options& opts) {
    auto pred = analyze_planar(node3_kernel(model), opts).prediction;
    pred.node = 3;
    return pred;
}

AsymptoticPrediction marginal_asymptotics(const ValidatedModel& model, int node,
                                          const Options& opts) {
    switch (node) {
        case 1: {
            const auto& m = model.params();
            return {1, 2.0 * (m.c[0] - m.lambda[0]) / (m.sigma[0] * m.sigma[0]), 0.0,
                    Regime::SimplePole};
        }
        case 2: {
            auto pred = analyze_planar(node2_kernel(model), opts).prediction;
            pred.node = 2;
            return pred;
        }
        case 3: return classify_node3(model, opts);
        default: throw InvalidParameter("node must be 1, 2 or 3");
    }
}

TauberianExponent tauberian_exponent(Regime regime) noexcept {
    switch (regime) {
        case Regime::SimplePole: return {1.0, 0.0};
        case Regime::PoleAtBranch: return {0.5, -0.5};
        // (alpha - z)^{1/2} term; one differentiation moves it to -1/2.
        case Regime::BranchPoint: return {-0.5, -1.5};
    }
    return {};
}

JointTailPredictor::JointTailPredictor(const std::array<AsymptoticPrediction, 3>& marginals) {
    for (int i = 0; i < 3; ++i) {
        alphas_[i] = marginals[i].alpha;
        mus_[i] = marginals[i].mu;
    }
}

double JointTailPredictor::log_value(const Vec3& point) const {
    double out = 0.0;
    for (int i = 0; i < 3; ++i) {
        if (mus_[i] != 0.0) out += mus_[i] * std::log(point[i]);
        out -= alphas_[i] * point[i];
    }
    return out;
}

double JointTailPredictor::operator()(const Vec3& point) const {
    return std::exp(log_value(point));
}

JointTailPredictor joint_tail_predictor(const ValidatedModel& model, const Options& opts) {
    return JointTailPredictor({marginal_asymptotics(model, 1, opts),
                               marginal_asymptotics(model, 2, opts),
                               marginal_asymptotics(model, 3, opts)});
}

BoundaryIdentity boundary_identity_point(const ValidatedModel& model) {
    const auto& m = model.params();
    return {2.0 * (m.c[2] - m.lambda[2] - m.c[1]) / (m.sigma[2] * m.sigma[2]),
            m.c[2] - m.lambda[0] - m.lambda[1] - m.lambda[2]};
}

KernelReport analyze(const ValidatedModel& model, const Options& opts) {
    if (!model.refined_stable()) {
        throw UnsupportedModel(
            "kernel analysis requires lambda1 < c1 and lambda_i + c_{i-1} < c_i; "
            "this weak-mode model needs a separate derivation");
    }
    KernelReport r;
    const PlanarKernel k3 = node3_kernel(model);
    const PlanarAnalysis a3 = analyze_planar(k3, opts);
    r.geometry = branch_points(model);
    r.geometry.z_star = a3.v_star;
    r.marginals = {marginal_asymptotics(model, 1, opts), marginal_asymptotics(model, 2, opts),
                   AsymptoticPrediction{3, a3.prediction.alpha, a3.prediction.mu,
                                        a3.prediction.regime}};
    r.boundary = boundary_identity_point(model);
    r.regulator_rates = regulator_rates(model.params());

    if (model.k1_is_one()) {
        r.warnings.emplace_back("k1 == 1: the generic kernel analysis assumes k1 != 1; "
                                "results use the limiting formulas");
    }
    if (a3.prediction.regime != Regime::PoleAtBranch &&
        a3.existence_test != a3.candidate_is_fixed_point) {
        r.warnings.emplace_back("existence test and closed-form fixed point disagree");
    }
    if (a3.v_star && a3.prediction.regime == Regime::SimplePole &&
        std::abs(*a3.v_star - a3.candidate) > 1e-8 * std::max(1.0, a3.candidate)) {
        r.warnings.emplace_back("bisection root of Y_max,0(z) = z differs from the closed form");
    }
    return r;
}

}  // namespace tandem::kernel
