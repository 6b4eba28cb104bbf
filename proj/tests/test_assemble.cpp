#include <doctest.h>

#include <cmath>
#include <random>

#include "tpfem/assemble.hpp"
#include "tpfem/quadrature.hpp"

using namespace tpfem;

namespace {

BoundaryValueProblem ex2_bvp(double eps) {
    BoundaryValueProblem b;
    b.epsilon = eps;
    b.p = [](double x) { return 1.0 - x * x; };
    b.dp = [](double x) { return -2.0 * x; };
    b.b = [](double) { return 3.0; };
    b.f = [](double x) { return std::exp(x); };
    b.x_left = -1.0;
    b.x_right = 1.0;
    b.u_left = 1.0;
    b.u_right = 2.0;
    return b;
}

BoundaryValueProblem ex3_bvp(double eps) {
    BoundaryValueProblem b;
    b.epsilon = eps;
    b.p = [](double x) { return -x * x * x; };
    b.dp = [](double x) { return -3.0 * x * x; };
    b.b = [](double) { return 1.0; };
    double se = std::sqrt(eps);
    b.f = [eps, se](double x) {
        return (x * x * x / se) * std::exp(-x / se) + (1.0 - eps - x * x * x) * std::exp(x);
    };
    b.x_left = 0.0;
    b.x_right = 1.0;
    b.u_left = 2.0;
    b.u_right = std::exp(-1.0 / se) + std::exp(1.0);
    b.allow_multiple_turning_points = true;
    return b;
}

struct Pieces {
    Partition part;
    PiecewiseCoefficients coeffs;
    std::vector<TestFunction> tests;
};

Pieces build_pieces(const BoundaryValueProblem& bvp, int n, DualMode mode, int n1) {
    auto singulars = classify_singular_points(bvp, find_turning_points(bvp, 4096));
    std::vector<double> locs;
    for (const auto& s : singulars) locs.push_back(s.location);
    Pieces p;
    p.part = build_partition(bvp.x_left, bvp.x_right, n, locs);
    NeighborhoodPlan plan = plan_neighborhoods(singulars, bvp.x_left, bvp.x_right);
    p.coeffs = approximate_coefficients(bvp, p.part, plan);
    p.tests = build_test_functions(p.coeffs, p.part, bvp.epsilon, mode, n1);
    return p;
}

}  // namespace

TEST_CASE("test functions: continuity, bounds, serial/parallel identity") {
    BoundaryValueProblem bvp = ex2_bvp(1e-3);
    Pieces p = build_pieces(bvp, 32, DualMode::Exact, 128);
    REQUIRE(static_cast<int>(p.tests.size()) == 31);
    for (const TestFunction& tf : p.tests) {
        double xi = p.part.nodes[tf.node_index];
        CHECK(tf.left.value(xi) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(tf.right.value(xi) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::fabs(tf.left.value(p.part.nodes[tf.node_index - 1])) < 1e-12);
        CHECK(std::fabs(tf.right.value(p.part.nodes[tf.node_index + 1])) < 1e-12);
    }

    auto serial = build_test_functions_serial(p.coeffs, p.part, bvp.epsilon, DualMode::Exact, 128);
    REQUIRE(serial.size() == p.tests.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].left.d_left == p.tests[i].left.d_left);     // bitwise
        CHECK(serial[i].right.d_right == p.tests[i].right.d_right);
        CHECK(serial[i].left.mass == p.tests[i].left.mass);
        CHECK(serial[i].right.mass == p.tests[i].right.mass);
    }
}

TEST_CASE("test functions stay within [0,1] for constant-coefficient problems") {
    BoundaryValueProblem b = ex2_bvp(1e-2);
    b.p = [](double) { return 0.5; };
    b.dp = [](double) { return 0.0; };
    b.x_left = 0.0;
    b.x_right = 1.0;
    Pieces p = build_pieces(b, 16, DualMode::Exact, 64);
    for (const TestFunction& tf : p.tests) {
        for (int q = 0; q <= 12; ++q) {
            double xl = p.part.nodes[tf.node_index - 1];
            double xi = p.part.nodes[tf.node_index];
            double xr = p.part.nodes[tf.node_index + 1];
            double vl = tf.left.value(xl + (xi - xl) * q / 12.0);
            double vr = tf.right.value(xi + (xr - xi) * q / 12.0);
            CHECK(vl >= -1e-12);
            CHECK(vl <= 1.0 + 1e-12);
            CHECK(vr >= -1e-12);
            CHECK(vr <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("exact and TFPM test functions agree on the submesh") {
    BoundaryValueProblem bvp = ex2_bvp(1e-4);
    auto worst_gap = [&bvp](int n1) {
        Pieces ex = build_pieces(bvp, 64, DualMode::Exact, n1);
        Pieces tf = build_pieces(bvp, 64, DualMode::Tfpm, n1);
        double worst = 0.0;
        for (std::size_t i = 0; i < ex.tests.size(); ++i) {
            for (const bool left : {true, false}) {
                const DualHalf& he = left ? ex.tests[i].left : ex.tests[i].right;
                const DualHalf& ht = left ? tf.tests[i].left : tf.tests[i].right;
                for (int q = 0; q <= 16; ++q) {
                    double x = he.x1 + (he.x2 - he.x1) * q / 16.0;
                    worst = std::max(worst, std::fabs(he.value(x) - ht.value(x)));
                }
            }
        }
        return worst;
    };
    // TFPM is second order in the submesh: ~1e-5 at N1=256 on these
    // 1/32-wide elements, through 1e-6 at N1=1024
    CHECK(worst_gap(256) <= 2e-5);
    CHECK(worst_gap(1024) <= 1e-6);
}

TEST_CASE("flux assembly matches the adaptive-quadrature bilinear form") {
    BoundaryValueProblem bvp = ex2_bvp(0.5);
    Pieces p = build_pieces(bvp, 8, DualMode::Exact, 128);
    TriDiagonalSystem sys = assemble(p.coeffs, p.tests, p.part, bvp);

    const int n = p.part.n_elements();
    // hat function at node j restricted to element k
    auto hat = [&](int j, double x) {
        double xj = p.part.nodes[j];
        if (j > 0 && x >= p.part.nodes[j - 1] - 1e-15 && x <= xj) {
            return (x - p.part.nodes[j - 1]) / (xj - p.part.nodes[j - 1]);
        }
        if (j < n && x >= xj && x <= p.part.nodes[j + 1] + 1e-15) {
            return (p.part.nodes[j + 1] - x) / (p.part.nodes[j + 1] - xj);
        }
        return 0.0;
    };
    auto dhat = [&](int j, double x) {
        double xj = p.part.nodes[j];
        if (j > 0 && x > p.part.nodes[j - 1] && x < xj) return 1.0 / (xj - p.part.nodes[j - 1]);
        if (j < n && x > xj && x < p.part.nodes[j + 1])
            return -1.0 / (p.part.nodes[j + 1] - xj);
        return 0.0;
    };

    for (int i = 1; i <= n - 1; ++i) {
        const TestFunction& tf = p.tests[i - 1];
        auto psi = [&](double x) {
            return x <= p.part.nodes[i] ? tf.left.value(x) : tf.right.value(x);
        };
        auto dpsi = [&](double x) {
            return x <= p.part.nodes[i] ? tf.left.derivative(x) : tf.right.derivative(x);
        };
        auto entry = [&](int j) {
            double acc = 0.0;
            for (int k = std::max(0, i - 1); k <= std::min(n - 1, i); ++k) {
                double xl = p.part.nodes[k], xr = p.part.nodes[k + 1];
                const PBar& pb = p.coeffs.pbar[k];
                double bb = p.coeffs.bbar[k];
                acc += adaptive_integrate(
                    [&](double x) {
                        return bvp.epsilon * dhat(j, x) * dpsi(x) + pb(x) * dhat(j, x) * psi(x) +
                               bb * hat(j, x) * psi(x);
                    },
                    xl, xr, 1e-12);
            }
            return acc;
        };
        double diag = entry(i);
        CHECK(std::fabs(diag - sys.diag[i - 1]) <= 1e-9 * std::fabs(diag));
        if (i > 1) {
            double sub = entry(i - 1);
            CHECK(std::fabs(sub - sys.sub[i - 1]) <= 1e-9 * std::max(std::fabs(sub), 1e-14));
        }
        if (i < n - 1) {
            double super = entry(i + 1);
            CHECK(std::fabs(super - sys.super[i - 1]) <= 1e-9 * std::max(std::fabs(super), 1e-14));
        }
        // right-hand side against the true (f, psi_i)
        double rhs = 0.0;
        for (int k = i - 1; k <= i; ++k) {
            rhs += adaptive_integrate([&](double x) { return bvp.f(x) * psi(x); },
                                      p.part.nodes[k], p.part.nodes[k + 1], 1e-12);
        }
        if (i == 1) rhs -= bvp.u_left * entry(0);
        if (i == n - 1) rhs -= bvp.u_right * entry(n);
        CHECK(std::fabs(rhs - sys.rhs[i - 1]) <= 1e-8 * std::max(std::fabs(rhs), 1e-12));
    }
}

TEST_CASE("self-adjoint problem assembles a symmetric matrix") {
    BoundaryValueProblem b = ex2_bvp(1.0);
    b.p = [](double) { return 0.0; };
    b.dp = [](double) { return 0.0; };
    b.b = [](double) { return 1.0; };
    b.f = [](double) { return 1.0; };
    b.x_left = 0.0;
    b.x_right = 1.0;
    b.u_left = b.u_right = 0.0;
    Pieces p = build_pieces(b, 12, DualMode::Exact, 64);
    TriDiagonalSystem sys = assemble(p.coeffs, p.tests, p.part, b);
    for (int i = 0; i + 1 < sys.size(); ++i)
        CHECK(sys.super[i] == doctest::Approx(sys.sub[i + 1]).epsilon(1e-12));
    // continuous pbar: no jump contribution
    for (const auto& prov : sys.provenance) CHECK(prov.p_jump == 0.0);
}

TEST_CASE("Thomas solve against a dense oracle") {
    TriDiagonalSystem id;
    id.diag = {1, 1, 1};
    id.sub = {0, 0, 0};
    id.super = {0, 0, 0};
    id.rhs = {3, -1, 2};
    auto x = solve_tridiagonal(id);
    CHECK(x[0] == 3.0);
    CHECK(x[1] == -1.0);
    CHECK(x[2] == 2.0);

    std::mt19937 rng(99);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const int n = 50;
    TriDiagonalSystem sys;
    sys.sub.resize(n);
    sys.diag.resize(n);
    sys.super.resize(n);
    sys.rhs.resize(n);
    for (int i = 0; i < n; ++i) {
        sys.sub[i] = i > 0 ? d(rng) : 0.0;
        sys.super[i] = i < n - 1 ? d(rng) : 0.0;
        sys.diag[i] = 3.0 + d(rng);  // diagonally dominant
        sys.rhs[i] = d(rng);
    }
    auto got = solve_tridiagonal(sys);

    // dense Gaussian elimination oracle
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (int i = 0; i < n; ++i) {
        a[i][i] = sys.diag[i];
        if (i > 0) a[i][i - 1] = sys.sub[i];
        if (i < n - 1) a[i][i + 1] = sys.super[i];
        a[i][n] = sys.rhs[i];
    }
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int r = k + 1; r < n; ++r)
            if (std::fabs(a[r][k]) > std::fabs(a[piv][k])) piv = r;
        std::swap(a[k], a[piv]);
        for (int r = k + 1; r < n; ++r) {
            double m = a[r][k] / a[k][k];
            for (int cidx = k; cidx <= n; ++cidx) a[r][cidx] -= m * a[k][cidx];
        }
    }
    std::vector<double> want(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = a[i][n];
        for (int j = i + 1; j < n; ++j) s -= a[i][j] * want[j];
        want[i] = s / a[i][i];
    }
    for (int i = 0; i < n; ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));

    TriDiagonalSystem sing;
    sing.diag = {1.0, 0.0};
    sing.sub = {0.0, 0.0};
    sing.super = {0.0, 0.0};
    sing.rhs = {1.0, 1.0};
    CHECK_THROWS_AS(solve_tridiagonal(sing), SolverError);
}

TEST_CASE("max principle check") {
    TriDiagonalSystem good;
    good.diag = {2, 2, 2};
    good.sub = {0, -1, -0.5};
    good.super = {-1, -0.5, 0};
    good.rhs = {1, 1, 1};
    CHECK(check_discrete_max_principle(good).is_m_like);

    TriDiagonalSystem bad = good;
    bad.super[1] = 0.5;  // positive off-diagonal
    auto rep = check_discrete_max_principle(bad);
    CHECK_FALSE(rep.is_m_like);
    CHECK(rep.worst_row == 1);

    TriDiagonalSystem weak = good;
    weak.diag[2] = 0.4;  // loses dominance
    auto rep2 = check_discrete_max_principle(weak);
    CHECK_FALSE(rep2.is_m_like);
    CHECK(rep2.worst_row == 2);
}

TEST_CASE("nodal exactness for the exactly representable problem") {
    BoundaryValueProblem b;
    b.epsilon = 1.0;
    b.p = [](double) { return 0.0; };
    b.b = [](double) { return 1.0; };
    b.f = [](double) { return 1.0; };
    b.dp = [](double) { return 0.0; };
    b.x_left = 0.0;
    b.x_right = 1.0;
    b.u_left = 0.0;
    b.u_right = 0.0;
    GridSolution sol = pgfem_solve(b, 16);
    const double e = std::exp(1.0);
    double worst = 0.0;
    for (int i = 0; i <= 16; ++i) {
        double x = sol.partition.nodes[i];
        double exact = 1.0 - (std::exp(x) + std::exp(1.0 - x)) / (1.0 + e);
        worst = std::max(worst, std::fabs(sol.values[i] - exact));
    }
    CHECK(worst <= 1e-10);
    CHECK(sol.info.max_principle.is_m_like);

    // invariance across eps for the exactly representable family
    for (double eps : {1e-3, 1e-6}) {
        b.epsilon = eps;
        GridSolution s2 = pgfem_solve(b, 8);
        double w2 = 0.0;
        double r = 1.0 / std::sqrt(eps);
        for (int i = 0; i <= 8; ++i) {
            double x = s2.partition.nodes[i];
            // exact solution of -eps u'' + u = 1 with zero boundary data
            double exact = 1.0 - (std::exp((x - 1.0) * r) + std::exp(-x * r)) /
                                     (1.0 + std::exp(-r));
            w2 = std::max(w2, std::fabs(s2.values[i] - exact));
        }
        CHECK(w2 <= 1e-10);
    }
}

TEST_CASE("assembled residual of the returned solution is tiny") {
    BoundaryValueProblem b = ex3_bvp(1e-6);
    SolveOptions opts;
    opts.mode = DualMode::Tfpm;
    opts.n1 = 256;
    GridSolution sol = pgfem_solve(b, 256, opts);

    Pieces p = build_pieces(b, 256, DualMode::Tfpm, 256);
    TriDiagonalSystem sys = assemble(p.coeffs, p.tests, p.part, b);
    double rnorm = 0.0, bnorm = 0.0;
    for (int i = 0; i < sys.size(); ++i) {
        double ax = sys.diag[i] * sol.values[i + 1];
        if (i > 0) ax += sys.sub[i] * sol.values[i];
        if (i < sys.size() - 1) ax += sys.super[i] * sol.values[i + 2];
        // boundary columns are folded into the rhs by the lift
        rnorm = std::max(rnorm, std::fabs(ax - sys.rhs[i]));
        bnorm = std::max(bnorm, std::fabs(sys.rhs[i]));
    }
    CHECK(rnorm <= 1e-10 * bnorm);
    CHECK(sol.info.max_principle.is_m_like);
}

TEST_CASE("exact and TFPM solves agree on the boundary-turning-point problem") {
    BoundaryValueProblem b = ex2_bvp(1e-4);
    SolveOptions exact_opts;
    exact_opts.mode = DualMode::Exact;
    GridSolution se = pgfem_solve(b, 128, exact_opts);
    SolveOptions tfpm_opts;
    tfpm_opts.mode = DualMode::Tfpm;
    tfpm_opts.n1 = 1024;
    GridSolution st = pgfem_solve(b, 128, tfpm_opts);
    double worst = 0.0;
    for (std::size_t i = 0; i < se.values.size(); ++i)
        worst = std::max(worst, std::fabs(se.values[i] - st.values[i]));
    CHECK(worst <= 1e-5);
}

TEST_CASE("pipeline errors carry their stage") {
    BoundaryValueProblem b = ex2_bvp(1e-3);
    b.b = [](double) { return -5.0; };  // condition fails, no waiver
    try {
        pgfem_solve(b, 16);
        CHECK(false);
    } catch (const SolverError& e) {
        CHECK(e.stage == "validate");
    }
}
