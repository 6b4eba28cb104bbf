#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tpfem/errors.hpp"

namespace tpfem {

using ScalarFn = std::function<double(double)>;

/// -eps*u'' + p(x)*u' + b(x)*u = f(x) on (x_left, x_right) with Dirichlet data.
///
/// Well-posedness of the dual problems needs b - p' >= gamma0 > 0; problems
/// violating it can still be attempted with waive_condition set (the paper's
/// first example is of this kind).
struct BoundaryValueProblem {
    double epsilon = 1.0;
    ScalarFn p, b, f;
    ScalarFn dp;  // p'; when absent, central differences are used
    double x_left = 0.0, x_right = 1.0;
    double u_left = 0.0, u_right = 0.0;
    bool waive_condition = false;
    bool allow_multiple_turning_points = false;

    double p_prime(double x) const {
        if (dp) return dp(x);
        double h = 1e-6 * (1.0 + std::fabs(x));
        return (p(x + h) - p(x - h)) / (2.0 * h);
    }

    void check_basic() const {
        if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
        if (!(x_left < x_right)) throw ConfigError("need x_left < x_right");
        if (!p || !b || !f) throw ConfigError("p, b, f must all be set");
    }
};

enum class SingularKind {
    ExponentialBoundaryLayer,
    AttractiveInteriorTP,
    RepulsiveInteriorTP,
    BoundaryTPPositiveSlope,
    BoundaryTPNegativeSlope,
    MultipleBoundaryTP,
};

std::string to_string(SingularKind k);

struct SingularPoint {
    double location;
    SingularKind kind;
    double slope;                  // p' at the location (0 for multiple TP)
    std::optional<double> lambda;  // -b/p', attractive interior TPs only
};

struct ValidationReport {
    double gamma0_estimate;
    bool condition_ok;
    std::vector<double> violations;  // sample points where b - p' < 0
};

/// Samples b - p' on a uniform grid; condition_ok iff the minimum is positive.
ValidationReport validate_problem(const BoundaryValueProblem& bvp, int samples);

/// All sign-change zeros of p (bisection-refined) plus endpoints where p
/// vanishes; sorted, deduplicated. Empty if p never vanishes.
std::vector<double> find_turning_points(const BoundaryValueProblem& bvp, int scan_resolution);

/// Classifies turning points by the sign of p' and adds the exponential
/// outflow boundary layer when p does not vanish there.
std::vector<SingularPoint> classify_singular_points(const BoundaryValueProblem& bvp,
                                                    const std::vector<double>& turning_points);

}  // namespace tpfem
