#include "tpfem/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tpfem {

std::string to_string(SingularKind k) {
    switch (k) {
        case SingularKind::ExponentialBoundaryLayer: return "exponential-boundary-layer";
        case SingularKind::AttractiveInteriorTP: return "attractive-interior-tp";
        case SingularKind::RepulsiveInteriorTP: return "repulsive-interior-tp";
        case SingularKind::BoundaryTPPositiveSlope: return "boundary-tp-positive-slope";
        case SingularKind::BoundaryTPNegativeSlope: return "boundary-tp-negative-slope";
        case SingularKind::MultipleBoundaryTP: return "multiple-boundary-tp";
    }
    return "?";
}

namespace {

double checked_eval(const ScalarFn& fn, double x, const char* name) {
    double v = fn(x);
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << name << " evaluated to a non-finite value at x = " << x;
        throw EvaluationError(os.str());
    }
    return v;
}

}  // namespace

ValidationReport validate_problem(const BoundaryValueProblem& bvp, int samples) {
    bvp.check_basic();
    if (samples < 2) throw ConfigError("validate_problem needs samples >= 2");

    ValidationReport rep{std::numeric_limits<double>::infinity(), false, {}};
    double w = bvp.x_right - bvp.x_left;
    for (int j = 0; j < samples; ++j) {
        double x = bvp.x_left + w * j / (samples - 1);
        double g = checked_eval(bvp.b, x, "b") - bvp.p_prime(x);
        if (!std::isfinite(g)) {
            std::ostringstream os;
            os << "b - p' evaluated to a non-finite value at x = " << x;
            throw EvaluationError(os.str());
        }
        if (g < rep.gamma0_estimate) rep.gamma0_estimate = g;
        if (g < 0.0) rep.violations.push_back(x);
    }
    rep.condition_ok = rep.gamma0_estimate > 0.0;
    return rep;
}

std::vector<double> find_turning_points(const BoundaryValueProblem& bvp, int scan_resolution) {
    bvp.check_basic();
    if (scan_resolution < 16) throw ConfigError("find_turning_points needs scan_resolution >= 16");

    const double xl = bvp.x_left, xr = bvp.x_right;
    const double w = xr - xl;
    const int n = scan_resolution;
    std::vector<double> px(n + 1);
    double sup_p = 0.0;
    for (int j = 0; j <= n; ++j) {
        double x = xl + w * j / n;
        px[j] = checked_eval(bvp.p, x, "p");
        sup_p = std::max(sup_p, std::fabs(px[j]));
    }
    // p identically zero: a pure reaction-diffusion problem, no turning points
    if (sup_p == 0.0) return {};

    const double scale = std::max(1.0, sup_p);
    const double zero_tol = 1e-13 * scale;
    const double endpoint_tol = 1e-12 * scale;
    const double cell = w / n;

    std::vector<double> roots;
    auto push_root = [&](double z) {
        for (double r : roots)
            if (std::fabs(r - z) <= cell) return;  // dedupe within one scan cell
        roots.push_back(z);
    };

    if (std::fabs(px[0]) <= endpoint_tol) push_root(xl);
    if (std::fabs(px[n]) <= endpoint_tol) push_root(xr);

    for (int j = 0; j < n; ++j) {
        double a = xl + w * j / n, b = xl + w * (j + 1) / n;
        double fa = px[j], fb = px[j + 1];
        if (std::fabs(fa) <= zero_tol) { push_root(a); continue; }
        if (std::fabs(fb) <= zero_tol) continue;  // handled as left edge of next cell
        if (fa * fb > 0.0) continue;
        // bisect the sign change
        for (int it = 0; it < 200; ++it) {
            double m = 0.5 * (a + b);
            double fm = checked_eval(bvp.p, m, "p");
            if (std::fabs(fm) <= zero_tol || (b - a) < 1e-16 * scale * (1.0 + std::fabs(m))) {
                a = b = m;
                break;
            }
            if (fa * fm <= 0.0) { b = m; fb = fm; }
            else { a = m; fa = fm; }
        }
        push_root(0.5 * (a + b));
    }

    std::sort(roots.begin(), roots.end());
    return roots;
}

std::vector<SingularPoint> classify_singular_points(const BoundaryValueProblem& bvp,
                                                    const std::vector<double>& turning_points) {
    bvp.check_basic();

    // slope tolerance scales with a coarse sample of |p'|
    double sup_dp = 0.0;
    for (int j = 0; j <= 64; ++j) {
        double x = bvp.x_left + (bvp.x_right - bvp.x_left) * j / 64.0;
        sup_dp = std::max(sup_dp, std::fabs(bvp.p_prime(x)));
    }
    const double slope_tol = 1e-10 * std::max(1.0, sup_dp);
    // interior roots are only bisection-accurate: a cubic zero refined to
    // |p| <= tau still shows |p'| ~ tau^(2/3), so the degeneracy test there
    // needs the wider margin
    const double interior_slope_tol = 1e-6 * std::max(1.0, sup_dp);
    const double loc_tol = 1e-12 * std::max(1.0, std::fabs(bvp.x_left) + std::fabs(bvp.x_right));

    std::vector<SingularPoint> out;
    bool zero_at_left = false, zero_at_right = false;

    for (double z : turning_points) {
        double slope = bvp.p_prime(z);
        bool at_left = std::fabs(z - bvp.x_left) <= loc_tol;
        bool at_right = std::fabs(z - bvp.x_right) <= loc_tol;
        if (at_left) zero_at_left = true;
        if (at_right) zero_at_right = true;

        if (at_left || at_right) {
            if (slope > slope_tol) {
                out.push_back({z, SingularKind::BoundaryTPPositiveSlope, slope, std::nullopt});
            } else if (slope < -slope_tol) {
                out.push_back({z, SingularKind::BoundaryTPNegativeSlope, slope, std::nullopt});
            } else {
                if (!bvp.allow_multiple_turning_points) {
                    std::ostringstream os;
                    os << "p' vanishes at boundary turning point x = " << z
                       << "; set allow_multiple_turning_points to accept it";
                    throw ConfigError(os.str());
                }
                out.push_back({z, SingularKind::MultipleBoundaryTP, 0.0, std::nullopt});
            }
            continue;
        }

        if (slope < -interior_slope_tol) {
            double lam = -bvp.b(z) / slope;
            out.push_back({z, SingularKind::AttractiveInteriorTP, slope, lam});
        } else if (slope > interior_slope_tol) {
            out.push_back({z, SingularKind::RepulsiveInteriorTP, slope, std::nullopt});
        } else {
            std::ostringstream os;
            os << "interior turning point x = " << z << " has |p'| below tolerance "
               << interior_slope_tol << "; cannot classify (interior multiple turning points"
               << " are not supported)";
            throw ConfigError(os.str());
        }
    }

    // Exponential layer at the outflow endpoint when p does not vanish there.
    double p_l = checked_eval(bvp.p, bvp.x_left, "p");
    double p_r = checked_eval(bvp.p, bvp.x_right, "p");
    if (!zero_at_right && p_r > 0.0)
        out.push_back({bvp.x_right, SingularKind::ExponentialBoundaryLayer, bvp.p_prime(bvp.x_right),
                       std::nullopt});
    if (!zero_at_left && p_l < 0.0)
        out.push_back({bvp.x_left, SingularKind::ExponentialBoundaryLayer, bvp.p_prime(bvp.x_left),
                       std::nullopt});

    std::sort(out.begin(), out.end(),
              [](const SingularPoint& a, const SingularPoint& b) { return a.location < b.location; });
    return out;
}

}  // namespace tpfem
