#pragma once

// Test-only adaptive ODE-integration oracles, independent of the solver's
// evaluation paths (boost::numeric::odeint with a tight controlled stepper).

#include <array>
#include <functional>
#include <vector>

#include <boost/numeric/odeint.hpp>

namespace oracle {

using State = std::array<double, 2>;

/// Integrates y'' = q(x) y from x0 to x1 with the given initial data.
inline State integrate_second_order(const std::function<double(double)>& q, double x0, double x1,
                                    double y0, double dy0, double tol = 1e-13) {
    namespace ode = boost::numeric::odeint;
    State s{y0, dy0};
    if (x0 == x1) return s;
    auto rhs = [&q](const State& y, State& dydx, double x) {
        dydx[0] = y[1];
        dydx[1] = q(x) * y[0];
    };
    auto stepper = ode::make_controlled<ode::runge_kutta_fehlberg78<State>>(tol, tol);
    double h = (x1 > x0 ? 1.0 : -1.0) * 1e-4;
    ode::integrate_adaptive(stepper, rhs, s, x0, x1, h);
    return s;
}

/// Weber equation y'' = (a + x^2/4) y.
inline State integrate_weber(double a, double x0, double x1, double y0, double dy0,
                             double tol = 1e-13) {
    return integrate_second_order([a](double x) { return a + 0.25 * x * x; }, x0, x1, y0, dy0, tol);
}

/// Shooting solution of the dual two-point problem
///   -eps psi'' - pbar(x) psi' + bhat psi = 0,  psi(x1), psi(x2) given,
/// sampled at the requested points. Valid while the dominant/recessive
/// magnitude spread stays far below 1/machine-eps; the caller constrains the
/// configurations accordingly.
inline std::vector<double> dual_bvp_shooting(const std::function<double(double)>& pbar, double eps,
                                             double bhat, double x1, double x2, double v1,
                                             double v2, const std::vector<double>& samples,
                                             double tol = 1e-13) {
    namespace ode = boost::numeric::odeint;
    using S2 = std::array<double, 4>;  // (yA, yA', yB, yB')
    auto rhs = [&](const S2& y, S2& d, double x) {
        double p = pbar(x);
        d[0] = y[1];
        d[1] = (-p * y[1] + bhat * y[0]) / eps;
        d[2] = y[3];
        d[3] = (-p * y[3] + bhat * y[2]) / eps;
    };
    S2 s{1.0, 0.0, 0.0, 1.0};
    auto stepper = ode::make_controlled<ode::runge_kutta_fehlberg78<S2>>(tol, tol);

    std::vector<double> xs = samples;
    xs.push_back(x2);
    std::vector<S2> at;
    double x = x1;
    for (double xt : xs) {
        if (xt > x) ode::integrate_adaptive(stepper, rhs, s, x, xt, 1e-6 * (x2 - x1));
        x = xt;
        at.push_back(s);
    }
    const S2& end = at.back();
    // psi = v1 * yA + beta * yB with beta fixed by the right boundary value
    double beta = (v2 - v1 * end[0]) / end[2];
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < at.size(); ++i) out.push_back(v1 * at[i][0] + beta * at[i][2]);
    return out;
}

}  // namespace oracle
