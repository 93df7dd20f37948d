// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tandem::roots {

struct Result {
    double x = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Plain bisection on [lo, hi]; f(lo) and f(hi) must differ in sign
/// (a zero at either end is returned immediately).
template <class F>
Result bisect(F&& f, double lo, double hi, double xtol = 0.0, int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return {lo, 0, true};
    if (fhi == 0.0) return {hi, 0, true};
    if ((flo < 0.0) == (fhi < 0.0)) {
        throw std::invalid_argument("bisect: root not bracketed");
    }
    for (int it = 1; it <= max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi || hi - lo <= xtol) return {mid, it, true};
        const double fm = f(mid);
        if (fm == 0.0) return {mid, it, true};
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return {0.5 * (lo + hi), max_iter, false};
}

/// Bisection down to a coarse bracket, then at most `newton_steps` Newton
/// steps. A Newton step that leaves the last bracket is rejected and the
/// bisection result kept.
template <class F, class DF>
Result bisect_newton(F&& f, DF&& df, double lo, double hi, int newton_steps = 5) {
    const double coarse = 1e-9 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    Result r = bisect(f, lo, hi, coarse);
    const double half = std::max(coarse, 1e-300);
    const double blo = r.x - half;
    const double bhi = r.x + half;
    double x = r.x;
    for (int i = 0; i < newton_steps; ++i) {
        const double fx = f(x);
        if (fx == 0.0) break;
        const double d = df(x);
        if (!std::isfinite(d) || d == 0.0) break;
        const double next = x - fx / d;
        if (!(next >= blo && next <= bhi)) break;
        if (std::abs(f(next)) > std::abs(fx)) break;
        const bool done = std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                                    std::max(1.0, std::abs(x));
        x = next;
        ++r.iterations;
        if (done) break;
    }
    r.x = x;
    return r;
}

}  // namespace tandem::roots
