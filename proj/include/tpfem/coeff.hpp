#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "tpfem/mesh.hpp"
#include "tpfem/problem.hpp"

namespace tpfem {

/// delta-neighborhoods J_i = [s_i - delta, s_i + delta] around the singular
/// points, with delta = min(0.1, min_gap/3) (domain_width/3 when there is a
/// single singular point).
struct NeighborhoodPlan {
    double delta = 0.0;
    std::vector<std::pair<double, double>> j_intervals;  // clipped to the domain
    std::vector<SingularPoint> singular_points;

    /// Index of the neighborhood containing x, or -1.
    int neighborhood_of(double x) const {
        for (std::size_t i = 0; i < j_intervals.size(); ++i)
            if (x >= j_intervals[i].first && x <= j_intervals[i].second)
                return static_cast<int>(i);
        return -1;
    }
};

NeighborhoodPlan plan_neighborhoods(const std::vector<SingularPoint>& singular_points,
                                    double x_left, double x_right);

/// Per-element convection model: a constant, or the tangent line anchored at
/// x_star.
struct PBar {
    enum class Kind { Constant, Linear } kind = Kind::Constant;
    double c = 0.0;                            // Constant
    double slope = 0.0, x_star = 0.0, value = 0.0;  // Linear: slope*(x-x_star)+value

    double operator()(double x) const {
        return kind == Kind::Constant ? c : slope * (x - x_star) + value;
    }
    double derivative() const { return kind == Kind::Constant ? 0.0 : slope; }

    static PBar constant(double v) { return {Kind::Constant, v, 0.0, 0.0, 0.0}; }
    static PBar linear(double slope, double x_star, double value) {
        return {Kind::Linear, 0.0, slope, x_star, value};
    }
};

/// Element-wise approximations: p replaced by constants (midpoint value) away
/// from the neighborhoods and by tangent lines inside them, anchored at the
/// adjacent singular point where there is one; b and f replaced by midpoint
/// constants everywhere.
struct PiecewiseCoefficients {
    std::vector<PBar> pbar;     // element k (0-based) covers [x_k, x_{k+1}]
    std::vector<double> bbar, fbar;
    std::vector<double> jump;   // [p](x_k) = pbar_{k}(x_k+) - pbar_{k-1}(x_k-), interior nodes

    /// Reaction coefficient of the element's dual operator, b_k - pbar_k'.
    double bhat(int k) const { return bbar[k] - pbar[k].derivative(); }
};

PiecewiseCoefficients approximate_coefficients(const BoundaryValueProblem& bvp,
                                               const Partition& part,
                                               const NeighborhoodPlan& plan);

}  // namespace tpfem
