#include "tpfem/examples.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace tpfem {

namespace {

Expression expr(const char* text) { return Expression::parse(text); }

}  // namespace

ExampleSpec example_ex1() {
    ExampleSpec s;
    s.id = "ex1";
    s.p = expr("cos(2*3.14159265358979323846*x)");
    s.b = expr("1");
    s.f = expr("1/(1+x^2)");
    s.x_left = 0.0;
    s.x_right = 1.0;
    s.u_left = expr("1");
    s.u_right = expr("2");
    s.eps_list = {1.0, 1e-2, 1e-4, 1e-6};
    s.n_list = {32, 64, 128, 256, 512, 1024};
    s.mode = DualMode::Exact;
    s.waive_condition = true;
    return s;
}

ExampleSpec example_ex2() {
    ExampleSpec s;
    s.id = "ex2";
    s.p = expr("1 - x^2");
    s.b = expr("3");
    s.f = expr("exp(x)");
    s.x_left = -1.0;
    s.x_right = 1.0;
    s.u_left = expr("1");
    s.u_right = expr("2");
    s.eps_list = {1.0, 1e-2, 1e-4, 1e-6};
    s.n_list = {32, 64, 128, 256, 512, 1024};
    s.mode = DualMode::Exact;
    return s;
}

ExampleSpec example_ex3() {
    ExampleSpec s;
    s.id = "ex3";
    s.p = expr("-x^3");
    s.b = expr("1");
    // f = -eps u'' - x^3 u' + u for u = exp(-x/sqrt(eps)) + exp(x)
    Expression u = expr("exp(-x/sqrt(eps)) + exp(x)");
    Expression du = u.derivative();
    Expression d2u = du.derivative();
    s.f = -(Expression::var_eps() * d2u) - expr("x^3") * du + u;
    s.x_left = 0.0;
    s.x_right = 1.0;
    s.u_left = expr("2");
    s.u_right = expr("exp(-1/sqrt(eps)) + exp(1)");
    s.eps_list = {1.0, 1e-2, 1e-4, 1e-6};
    s.n_list = {32, 64, 128, 256, 512, 1024};
    s.mode = DualMode::Tfpm;
    s.exact_solution = u;
    s.allow_multiple_turning_points = true;
    return s;
}

ExampleSpec example_by_id(const std::string& id) {
    if (id == "ex1") return example_ex1();
    if (id == "ex2") return example_ex2();
    if (id == "ex3") return example_ex3();
    throw ConfigError("unknown example id '" + id + "' (expected ex1, ex2 or ex3)");
}

BoundaryValueProblem make_bvp(const ExampleSpec& spec, double eps) {
    if (!(eps > 0.0)) throw ConfigError("make_bvp: eps must be positive");
    BoundaryValueProblem bvp;
    bvp.epsilon = eps;
    Expression p = spec.p, b = spec.b, f = spec.f, dp = spec.p.derivative();
    bvp.p = [p, eps](double x) { return p.eval(x, eps); };
    bvp.dp = [dp, eps](double x) { return dp.eval(x, eps); };
    bvp.b = [b, eps](double x) { return b.eval(x, eps); };
    bvp.f = [f, eps](double x) { return f.eval(x, eps); };
    bvp.x_left = spec.x_left;
    bvp.x_right = spec.x_right;
    bvp.u_left = spec.u_left.eval(spec.x_left, eps);
    bvp.u_right = spec.u_right.eval(spec.x_right, eps);
    bvp.waive_condition = spec.waive_condition;
    bvp.allow_multiple_turning_points = spec.allow_multiple_turning_points;
    return bvp;
}

Reference make_reference(const ExampleSpec& spec, double eps, const GridSolution* ref_run) {
    if (spec.exact_solution) {
        Expression u = *spec.exact_solution;
        return ExactReference([u, eps](double x) { return u.eval(x, eps); });
    }
    if (!ref_run) throw ConfigError("make_reference: missing reference run");
    return GridReference{ref_run->partition, ref_run->values};
}

RunResult run_example(const ExampleSpec& spec, const RunOptions& opts) {
    if (spec.eps_list.empty()) throw ConfigError("run_example: empty eps list");
    if (spec.n_list.empty()) throw ConfigError("run_example: empty N list");
    const int ref_n = opts.ref_n.value_or(spec.ref_n);

    auto t0 = std::chrono::steady_clock::now();
    RunResult out;

    {
        BoundaryValueProblem bvp = make_bvp(spec, spec.eps_list.front());
        out.singular_points = classify_singular_points(bvp, find_turning_points(bvp, 4096));
    }

    // References first, one per eps, reused across the N sweep.
    const bool needs_grid_ref = !spec.exact_solution.has_value();
    if (needs_grid_ref) {
        SolveOptions ro;
        ro.mode = DualMode::Exact;
        ro.n1 = spec.n1;
        ro.parallel_duals = opts.parallel;
        for (double eps : spec.eps_list) {
            try {
                out.references.emplace(eps, pgfem_solve(make_bvp(spec, eps), ref_n, ro));
            } catch (const SolverError& e) {
                out.errors.push_back({eps, ref_n, "reference:" + e.stage, e.what()});
            } catch (const std::exception& e) {
                out.errors.push_back({eps, ref_n, "reference", e.what()});
            }
        }
    }

    SolveOptions so;
    so.mode = spec.mode;
    so.n1 = spec.n1;
    so.repulsive = opts.repulsive;
    so.parallel_duals = opts.parallel;

    for (double eps : spec.eps_list) {
        if (needs_grid_ref && !out.references.count(eps)) continue;  // reference failed
        for (int n : spec.n_list) {
            try {
                GridSolution cell = pgfem_solve(make_bvp(spec, eps), n, so);
                if (opts.with_baseline) {
                    out.baselines.push_back(upwind_shishkin_solve(make_bvp(spec, eps), n));
                }
                out.solutions.push_back(std::move(cell));
            } catch (const SolverError& e) {
                out.errors.push_back({eps, n, e.stage, e.what()});
            } catch (const std::exception& e) {
                out.errors.push_back({eps, n, "run", e.what()});
            }
        }
    }

    auto provider = [&spec, &out](double eps) {
        auto it = out.references.find(eps);
        return make_reference(spec, eps, it == out.references.end() ? nullptr : &it->second);
    };
    std::string ref_kind = spec.exact_solution
                               ? "exact solution"
                               : "exact-dual run at N=" + std::to_string(ref_n);
    out.table = error_report(out.solutions, provider, ref_kind);
    out.seconds_total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

std::vector<LayerSpec> layers_from_singular_points(const std::vector<SingularPoint>& singulars,
                                                   double x_left, double x_right) {
    const double tol = 1e-12 * std::max(1.0, std::fabs(x_left) + std::fabs(x_right));
    std::vector<LayerSpec> layers;
    for (const SingularPoint& s : singulars) {
        bool at_left = std::fabs(s.location - x_left) <= tol;
        switch (s.kind) {
            case SingularKind::ExponentialBoundaryLayer:
                layers.push_back({s.location, LayerSpec::Width::Eps,
                                  at_left ? LayerSpec::Side::Right : LayerSpec::Side::Left});
                break;
            case SingularKind::AttractiveInteriorTP:
                layers.push_back({s.location, LayerSpec::Width::SqrtEps, LayerSpec::Side::Both});
                break;
            case SingularKind::BoundaryTPPositiveSlope:
            case SingularKind::BoundaryTPNegativeSlope:
            case SingularKind::MultipleBoundaryTP:
                layers.push_back({s.location, LayerSpec::Width::SqrtEps,
                                  at_left ? LayerSpec::Side::Right : LayerSpec::Side::Left});
                break;
            case SingularKind::RepulsiveInteriorTP:
                break;  // smooth there
        }
    }
    return layers;
}

GridSolution upwind_shishkin_solve(const BoundaryValueProblem& bvp, int n) {
    bvp.check_basic();
    std::vector<SingularPoint> singulars =
        classify_singular_points(bvp, find_turning_points(bvp, 4096));
    std::vector<LayerSpec> layers = layers_from_singular_points(singulars, bvp.x_left, bvp.x_right);
    Partition mesh = shishkin_mesh(bvp.x_left, bvp.x_right, n, bvp.epsilon, layers);

    TriDiagonalSystem sys;
    sys.sub.assign(n - 1, 0.0);
    sys.diag.assign(n - 1, 0.0);
    sys.super.assign(n - 1, 0.0);
    sys.rhs.assign(n - 1, 0.0);

    const double eps = bvp.epsilon;
    for (int i = 1; i <= n - 1; ++i) {
        double x = mesh.nodes[i];
        double hl = mesh.element_size(i), hr = mesh.element_size(i + 1);
        double pi = bvp.p(x), bi = bvp.b(x), fi = bvp.f(x);

        double wl = -2.0 * eps / ((hl + hr) * hl);
        double wr = -2.0 * eps / ((hl + hr) * hr);
        double sub = wl, diag = -wl - wr + bi, super = wr;
        if (pi >= 0.0) {  // backward difference against the flow
            sub += -pi / hl;
            diag += pi / hl;
        } else {
            diag += -pi / hr;
            super += pi / hr;
        }
        sys.sub[i - 1] = sub;
        sys.diag[i - 1] = diag;
        sys.super[i - 1] = super;
        sys.rhs[i - 1] = fi;
        if (i == 1) sys.rhs[i - 1] -= sub * bvp.u_left;
        if (i == n - 1) sys.rhs[i - 1] -= super * bvp.u_right;
    }

    std::vector<double> interior = solve_tridiagonal(sys);
    GridSolution sol;
    sol.partition = std::move(mesh);
    sol.values.resize(n + 1);
    sol.values.front() = bvp.u_left;
    sol.values.back() = bvp.u_right;
    for (int i = 1; i <= n - 1; ++i) sol.values[i] = interior[i - 1];
    sol.info.epsilon = eps;
    return sol;
}

std::map<double, std::map<double, double>> derivative_bound_diagnostic(
    const std::vector<GridSolution>& solutions, const std::vector<SingularPoint>& singulars) {
    std::vector<double> eps_seen;
    for (const GridSolution& s : solutions) {
        if (std::find(eps_seen.begin(), eps_seen.end(), s.info.epsilon) == eps_seen.end())
            eps_seen.push_back(s.info.epsilon);
    }
    if (eps_seen.size() < 2)
        throw ConfigError("derivative_bound_diagnostic needs solutions at two or more eps values");

    std::map<double, std::map<double, double>> out;
    for (const SingularPoint& sp : singulars) {
        if (sp.kind == SingularKind::RepulsiveInteriorTP) continue;  // no layer there
        for (const GridSolution& sol : solutions) {
            const Partition& part = sol.partition;
            double w = part.x_right() - part.x_left();
            double lo = part.x_left(), hi = part.x_right();
            if (sp.kind == SingularKind::BoundaryTPPositiveSlope) {
                // the bound holds on the half of the domain next to the point
                if (std::fabs(sp.location - part.x_left()) < std::fabs(sp.location - part.x_right()))
                    hi = sp.location + 0.5 * w;
                else
                    lo = sp.location - 0.5 * w;
            }
            double stat = 0.0;
            for (int i = 1; i <= part.n_elements(); ++i) {
                double x = part.nodes[i];
                if (x < lo || x > hi) continue;
                double du = (sol.values[i] - sol.values[i - 1]) / part.element_size(i);
                stat = std::max(stat, std::fabs((x - sp.location) * du));
            }
            double& slot = out[sp.location][sol.info.epsilon];
            slot = std::max(slot, stat);
        }
    }
    return out;
}

}  // namespace tpfem
