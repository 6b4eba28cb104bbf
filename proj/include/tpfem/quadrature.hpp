#pragma once

#include <cmath>
#include <cstdlib>

namespace tpfem {

namespace detail {

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson integration with Richardson correction.
/// tol is absolute; callers integrating quantities of unknown scale should do
/// a rough pass first and rescale.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 48) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Two-pass wrapper: estimates the scale on a coarse panel sweep, then
/// integrates to rel_tol relative accuracy (with a tiny absolute floor).
template <typename F>
double adaptive_integrate(const F& f, double a, double b, double rel_tol,
                          double abs_floor = 1e-300) {
    if (a == b) return 0.0;
    int n = 32;
    double scale = 0.0, h = (b - a) / n;
    for (int i = 0; i <= n; ++i) scale = std::max(scale, std::fabs(f(a + i * h)));
    double tol = std::max(rel_tol * scale * std::fabs(b - a), abs_floor);
    return adaptive_simpson(f, a, b, tol);
}

}  // namespace tpfem
