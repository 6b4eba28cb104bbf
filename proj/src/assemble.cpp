#include "tpfem/assemble.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace tpfem {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

TriDiagonalSystem assemble(const PiecewiseCoefficients& coeffs,
                           const std::vector<TestFunction>& tests, const Partition& part,
                           const BoundaryValueProblem& bvp) {
    const int n = part.n_elements();
    if (static_cast<int>(tests.size()) != n - 1)
        throw ConfigError("assemble: expected N-1 test functions");

    TriDiagonalSystem sys;
    sys.sub.assign(n - 1, 0.0);
    sys.diag.assign(n - 1, 0.0);
    sys.super.assign(n - 1, 0.0);
    sys.rhs.assign(n - 1, 0.0);
    sys.provenance.resize(n - 1);

    const double eps = bvp.epsilon;
    for (int i = 1; i <= n - 1; ++i) {
        const TestFunction& tf = tests[i - 1];
        const DualHalf& l = tf.left;   // on I_i = [x_{i-1}, x_i], bc (0,1)
        const DualHalf& r = tf.right;  // on I_{i+1} = [x_i, x_{i+1}], bc (1,0)
        if (!std::isfinite(l.d_left) || !std::isfinite(l.d_right) || !std::isfinite(r.d_left) ||
            !std::isfinite(r.d_right)) {
            std::ostringstream os;
            os << "missing endpoint derivative on test function " << i;
            throw SolverError("assemble", os.str());
        }

        // A(phi_j, psi_i) collapses to the endpoint fluxes phi (eps psi' + pbar psi)
        // because phi is elementwise linear and psi_i solves the adjoint
        // equation on each element.
        double x_i = part.nodes[i];
        double p_left_of_node = coeffs.pbar[i - 1](x_i);
        double p_right_of_node = coeffs.pbar[i](x_i);

        sys.sub[i - 1] = -eps * l.d_left;
        sys.super[i - 1] = eps * r.d_right;
        sys.diag[i - 1] = eps * (l.d_right - r.d_left) + (p_left_of_node - p_right_of_node);
        // the load is integrated against the true f: at small eps the test
        // functions are narrow spikes, and sampling f only at element
        // midpoints would shift the effective load by O(h)
        sys.rhs[i - 1] = l.integrate_load(bvp.f) + r.integrate_load(bvp.f);
        sys.provenance[i - 1] = {l.d_left, l.d_right, r.d_left, r.d_right,
                                 p_left_of_node - p_right_of_node};
    }

    // Dirichlet lifts
    sys.rhs[0] += bvp.u_left * eps * tests[0].left.d_left;
    sys.rhs[n - 2] -= bvp.u_right * eps * tests[n - 2].right.d_right;
    return sys;
}

std::vector<double> solve_tridiagonal(const TriDiagonalSystem& sys) {
    const int n = sys.size();
    std::vector<double> diag = sys.diag, rhs = sys.rhs;
    for (int i = 1; i < n; ++i) {
        if (std::fabs(diag[i - 1]) < 1e-300)
            throw SolverError("solve", "tridiagonal pivot vanished at row " + std::to_string(i - 1));
        double m = sys.sub[i] / diag[i - 1];
        diag[i] -= m * sys.super[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    if (std::fabs(diag[n - 1]) < 1e-300)
        throw SolverError("solve", "tridiagonal pivot vanished at last row");
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = (rhs[i] - sys.super[i] * x[i + 1]) / diag[i];
    return x;
}

namespace {

/// Banded LU with partial pivoting for the rare non-M-matrix fall-back.
/// Row swaps widen the upper band to two superdiagonals.
std::vector<double> solve_banded_pivoting(const TriDiagonalSystem& sys) {
    const int n = sys.size();
    std::vector<double> a(n, 0.0), d = sys.diag, c(n, 0.0), c2(n, 0.0), rhs = sys.rhs;
    for (int i = 0; i < n; ++i) {
        if (i > 0) a[i] = sys.sub[i];
        if (i < n - 1) c[i] = sys.super[i];
    }
    for (int k = 0; k < n - 1; ++k) {
        if (std::fabs(a[k + 1]) > std::fabs(d[k])) {
            std::swap(d[k], a[k + 1]);
            std::swap(c[k], d[k + 1]);
            std::swap(c2[k], c[k + 1]);
            std::swap(rhs[k], rhs[k + 1]);
        }
        if (std::fabs(d[k]) < 1e-300) throw SolverError("solve", "singular system (pivoted)");
        double m = a[k + 1] / d[k];
        d[k + 1] -= m * c[k];
        c[k + 1] -= m * c2[k];
        rhs[k + 1] -= m * rhs[k];
    }
    if (std::fabs(d[n - 1]) < 1e-300) throw SolverError("solve", "singular system (pivoted)");
    std::vector<double> x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = rhs[i];
        if (i + 1 < n) s -= c[i] * x[i + 1];
        if (i + 2 < n) s -= c2[i] * x[i + 2];
        x[i] = s / d[i];
    }
    return x;
}

}  // namespace

MaxPrincipleReport check_discrete_max_principle(const TriDiagonalSystem& sys) {
    const int n = sys.size();
    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        scale = std::max({scale, std::fabs(sys.diag[i]), std::fabs(sys.sub[i]),
                          std::fabs(sys.super[i])});
    const double tol = 1e-12 * std::max(scale, 1e-300);

    MaxPrincipleReport rep;
    rep.is_m_like = true;
    rep.margins.resize(n);
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        double sub = i > 0 ? sys.sub[i] : 0.0;
        double super = i < n - 1 ? sys.super[i] : 0.0;
        double m = std::min({sys.diag[i], -sub, -super,
                             sys.diag[i] - std::fabs(sub) - std::fabs(super)});
        rep.margins[i] = m;
        bool ok = sys.diag[i] > 0.0 && sub <= tol && super <= tol &&
                  sys.diag[i] >= std::fabs(sub) + std::fabs(super) - tol;
        if (!ok) rep.is_m_like = false;
        if (m < worst) {
            worst = m;
            rep.worst_row = i;
        }
    }
    return rep;
}

GridSolution pgfem_solve(const BoundaryValueProblem& bvp, int n, const SolveOptions& opts) {
    bvp.check_basic();

    ValidationReport val = validate_problem(bvp, opts.validation_samples);
    if (!val.condition_ok && !bvp.waive_condition) {
        std::ostringstream os;
        os << "condition b - p' >= gamma0 > 0 fails (min " << val.gamma0_estimate
           << "); set waive_condition to proceed anyway";
        throw SolverError("validate", os.str());
    }

    std::vector<double> tps;
    std::vector<SingularPoint> singulars;
    try {
        tps = find_turning_points(bvp, opts.scan_resolution);
        singulars = classify_singular_points(bvp, tps);
    } catch (const ConfigError& e) {
        throw SolverError("classify", e.what());
    }

    // Repulsive interior turning points destabilize the numerical duals; the
    // default drops them from the singular list in tfpm mode and keeps them
    // (tangent-line model) with exact duals.
    bool drop_repulsive = opts.repulsive == SolveOptions::Repulsive::Drop ||
                          (opts.repulsive == SolveOptions::Repulsive::Auto &&
                           opts.mode == DualMode::Tfpm);
    if (drop_repulsive) {
        std::erase_if(singulars, [](const SingularPoint& s) {
            return s.kind == SingularKind::RepulsiveInteriorTP;
        });
    }

    std::vector<double> locations;
    for (const SingularPoint& s : singulars) locations.push_back(s.location);

    GridSolution sol;
    sol.info.mode = opts.mode;
    sol.info.n1 = opts.n1;
    sol.info.epsilon = bvp.epsilon;

    Partition part;
    PiecewiseCoefficients coeffs;
    try {
        part = build_partition(bvp.x_left, bvp.x_right, n, locations);
        NeighborhoodPlan plan = plan_neighborhoods(singulars, bvp.x_left, bvp.x_right);
        coeffs = approximate_coefficients(bvp, part, plan);
    } catch (const ConfigError& e) {
        throw SolverError("approximate", e.what());
    }

    auto t0 = std::chrono::steady_clock::now();
    std::vector<TestFunction> tests;
    try {
        int fb = 0;
        tests = opts.parallel_duals
                    ? build_test_functions(coeffs, part, bvp.epsilon, opts.mode, opts.n1, &fb)
                    : build_test_functions_serial(coeffs, part, bvp.epsilon, opts.mode, opts.n1,
                                                  &fb);
        sol.info.pcf_fallbacks = fb;
    } catch (const SolverError&) {
        throw;
    } catch (const std::exception& e) {
        throw SolverError("duals", e.what());
    }
    sol.info.seconds_duals = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    TriDiagonalSystem sys = assemble(coeffs, tests, part, bvp);
    sol.info.seconds_assemble = seconds_since(t0);

    sol.info.max_principle = check_discrete_max_principle(sys);

    t0 = std::chrono::steady_clock::now();
    std::vector<double> interior;
    if (sol.info.max_principle.is_m_like) {
        interior = solve_tridiagonal(sys);
    } else {
        // no M-matrix guarantee: use the pivoted banded solver
        sol.info.used_pivoting = true;
        interior = solve_banded_pivoting(sys);
    }
    sol.info.seconds_solve = seconds_since(t0);

    sol.partition = std::move(part);
    sol.values.resize(n + 1);
    sol.values.front() = bvp.u_left;
    sol.values.back() = bvp.u_right;
    for (int i = 1; i <= n - 1; ++i) sol.values[i] = interior[i - 1];
    return sol;
}

}  // namespace tpfem
