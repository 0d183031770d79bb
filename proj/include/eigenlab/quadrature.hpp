#pragma once

#include <cmath>
#include <functional>

#include "eigenlab/error.hpp"

namespace eigenlab::quad {

struct Result {
    double value = 0.0;
    double error_estimate = 0.0;
    int evaluations = 0;
};

namespace detail {

template <typename F>
double simpson_step(F& f, double a, double fa, double b, double fb, double m, double fm, double whole, double tol, int depth,
                    int max_depth, Result& r) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    r.evaluations += 2;
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth >= max_depth || std::abs(delta) <= 15.0 * tol) {
        r.error_estimate += std::abs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1, max_depth, r) +
           simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1, max_depth, r);
}

}  // namespace detail

/// Adaptive Simpson rule on [a, b] with absolute tolerance `tol`.
/// The interval is first split into `pieces` equal panels so that narrow
/// features are not missed by the initial five-point sample.
template <typename F>
Result simpson(F&& f, double a, double b, double tol = 1e-12, int pieces = 8, int max_depth = 40) {
    Result r;
    if (!(b > a)) return r;
    if (!std::isfinite(a) || !std::isfinite(b)) throw InputError("simpson: limits must be finite");
    const double h = (b - a) / pieces;
    for (int p = 0; p < pieces; ++p) {
        const double lo = a + h * p;
        const double hi = p + 1 == pieces ? b : a + h * (p + 1);
        const double mid = 0.5 * (lo + hi);
        const double flo = f(lo), fhi = f(hi), fmid = f(mid);
        r.evaluations += 3;
        const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        r.value += detail::simpson_step(f, lo, flo, hi, fhi, mid, fmid, whole, tol / pieces, 0, max_depth, r);
    }
    return r;
}

/// Iterated adaptive Simpson over the box [lo, hi]^2.
template <typename F>
Result simpson2(F&& f, const double lo[2], const double hi[2], double tol = 1e-10) {
    Result total;
    auto inner = [&](double x) {
        Result r = simpson([&](double y) { return f(x, y); }, lo[1], hi[1], tol / (hi[0] - lo[0]) * 0.5, 4);
        total.evaluations += r.evaluations;
        return r.value;
    };
    Result outer = simpson(inner, lo[0], hi[0], tol * 0.5, 4);
    total.value = outer.value;
    total.error_estimate = outer.error_estimate;
    return total;
}

/// Iterated adaptive Simpson over the box [lo, hi]^3.
template <typename F>
Result simpson3(F&& f, const double lo[3], const double hi[3], double tol = 1e-9) {
    Result total;
    auto inner = [&](double x) {
        const double l2[2] = {lo[1], lo[2]};
        const double h2[2] = {hi[1], hi[2]};
        Result r = simpson2([&](double y, double z) { return f(x, y, z); }, l2, h2, tol / (hi[0] - lo[0]) * 0.5);
        total.evaluations += r.evaluations;
        return r.value;
    };
    Result outer = simpson(inner, lo[0], hi[0], tol * 0.5, 4);
    total.value = outer.value;
    total.error_estimate = outer.error_estimate;
    return total;
}

}  // namespace eigenlab::quad
