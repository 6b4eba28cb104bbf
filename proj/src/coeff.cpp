#include "tpfem/coeff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tpfem {

NeighborhoodPlan plan_neighborhoods(const std::vector<SingularPoint>& singular_points,
                                    double x_left, double x_right) {
    NeighborhoodPlan plan;
    plan.singular_points = singular_points;
    if (singular_points.empty()) return plan;

    double width = x_right - x_left;
    if (singular_points.size() >= 2) {
        double min_gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < singular_points.size(); ++i)
            min_gap = std::min(min_gap,
                               singular_points[i].location - singular_points[i - 1].location);
        plan.delta = std::min(0.1, min_gap / 3.0);
    } else {
        plan.delta = std::min(0.1, width / 3.0);
    }

    for (const SingularPoint& s : singular_points) {
        double lo = std::max(x_left, s.location - plan.delta);
        double hi = std::min(x_right, s.location + plan.delta);
        plan.j_intervals.push_back({lo, hi});
    }
    return plan;
}

PiecewiseCoefficients approximate_coefficients(const BoundaryValueProblem& bvp,
                                               const Partition& part,
                                               const NeighborhoodPlan& plan) {
    const int n = part.n_elements();
    const double node_tol =
        1e-12 * std::max(1.0, std::fabs(part.x_left()) + std::fabs(part.x_right()));

    // scale for deciding that a tangent line is effectively constant
    double sup_dp = 0.0;
    for (int j = 0; j <= 64; ++j) {
        double x = part.x_left() + (part.x_right() - part.x_left()) * j / 64.0;
        sup_dp = std::max(sup_dp, std::fabs(bvp.p_prime(x)));
    }
    const double slope_tol = 1e-12 * std::max(1.0, sup_dp);

    PiecewiseCoefficients out;
    out.pbar.resize(n);
    out.bbar.resize(n);
    out.fbar.resize(n);

    for (int k = 0; k < n; ++k) {
        double xl = part.nodes[k], xr = part.nodes[k + 1];
        double mid = 0.5 * (xl + xr);
        out.bbar[k] = bvp.b(mid);
        out.fbar[k] = bvp.f(mid);

        if (plan.neighborhood_of(mid) < 0) {
            out.pbar[k] = PBar::constant(bvp.p(mid));
            continue;
        }

        // anchored at the adjacent singular point when there is exactly one
        // (and it is not a multiple turning point, whose tangent degenerates)
        const SingularPoint* adjacent = nullptr;
        int n_adjacent = 0;
        for (const SingularPoint& s : plan.singular_points) {
            if (std::fabs(s.location - xl) <= node_tol || std::fabs(s.location - xr) <= node_tol) {
                ++n_adjacent;
                adjacent = &s;
            }
        }
        if (n_adjacent > 1) {
            std::ostringstream os;
            os << "element [" << xl << ", " << xr << "] is adjacent to two singular points; "
               << "this cannot happen once N >= 4/delta (= " << std::ceil(4.0 / plan.delta)
               << " here) -- increase N";
            throw ConfigError(os.str());
        }

        double anchor = mid;
        if (adjacent && adjacent->kind != SingularKind::MultipleBoundaryTP)
            anchor = adjacent->location;

        double slope = bvp.p_prime(anchor);
        double value = bvp.p(anchor);
        if (std::fabs(slope) <= slope_tol)
            out.pbar[k] = PBar::constant(value);
        else
            out.pbar[k] = PBar::linear(slope, anchor, value);
    }

    out.jump.resize(n > 0 ? n - 1 : 0);
    for (int k = 1; k < n; ++k) {
        double x = part.nodes[k];
        out.jump[k - 1] = out.pbar[k](x) - out.pbar[k - 1](x);
    }
    return out;
}

}  // namespace tpfem
