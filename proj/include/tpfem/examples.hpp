#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tpfem/assemble.hpp"
#include "tpfem/expr.hpp"
#include "tpfem/norms.hpp"

namespace tpfem {

/// A benchmark problem: coefficients as expressions (so p' is symbolic), the
/// sweep lists, and the dual mode the tables are produced with.
struct ExampleSpec {
    std::string id;  // ex1 | ex2 | ex3 | custom
    Expression p, b, f;
    double x_left = 0.0, x_right = 1.0;
    Expression u_left, u_right;  // may depend on eps
    std::vector<double> eps_list;
    std::vector<int> n_list;
    DualMode mode = DualMode::Exact;
    int n1 = 256;
    std::optional<Expression> exact_solution;  // of (x, eps); ex3 only
    int ref_n = 4096;
    bool waive_condition = false;
    bool allow_multiple_turning_points = false;
};

/// -eps u'' + cos(2 pi x) u' + u = 1/(1+x^2), u(0)=1, u(1)=2.
/// Interior layer at 1/4, repulsive point at 3/4, boundary layer at 1;
/// b - p' dips below zero, so the run carries the validation waiver.
ExampleSpec example_ex1();

/// -eps u'' + (1-x^2) u' + 3u = e^x on (-1,1), u(-1)=1, u(1)=2.
/// Boundary turning points of either slope at the endpoints.
ExampleSpec example_ex2();

/// -eps u'' - x^3 u' + u = f, u(0)=2, u(1)=e^{-1/sqrt(eps)}+e, with f derived
/// symbolically from the exact solution u = e^{-x/sqrt(eps)} + e^x.
/// Multiple boundary turning point at 0; numerical duals.
ExampleSpec example_ex3();

ExampleSpec example_by_id(const std::string& id);

BoundaryValueProblem make_bvp(const ExampleSpec& spec, double eps);

/// Reference for the given eps: the exact solution when the spec has one,
/// otherwise an exact-dual run at ref_n nodes (cached by the caller).
Reference make_reference(const ExampleSpec& spec, double eps, const GridSolution* ref_run);

struct RunOptions {
    bool with_baseline = false;
    bool parallel = true;
    std::optional<int> ref_n;  // overrides spec.ref_n
    SolveOptions::Repulsive repulsive = SolveOptions::Repulsive::Auto;
};

struct CellError {
    double eps;
    int n;
    std::string stage;
    std::string message;
};

struct RunResult {
    ErrorReport table;
    std::vector<GridSolution> solutions;            // successful cells, (eps, N) order
    std::map<double, GridSolution> references;      // per eps (grid-reference specs only)
    std::vector<GridSolution> baselines;            // aligned with solutions when requested
    std::vector<SingularPoint> singular_points;
    std::vector<CellError> errors;                  // failed cells, with stage tags
    double seconds_total = 0.0;
};

/// Sweeps (eps, N), computing the per-eps reference once and reusing it.
/// Failures are collected per cell; the table covers the cells that finished.
RunResult run_example(const ExampleSpec& spec, const RunOptions& opts = {});

/// First-order upwind finite differences on the layer-adapted mesh derived
/// from the classification; the qualitative comparison baseline.
GridSolution upwind_shishkin_solve(const BoundaryValueProblem& bvp, int n);

/// Layer-adapted mesh spec derived from the singular-point classification.
std::vector<LayerSpec> layers_from_singular_points(const std::vector<SingularPoint>& singulars,
                                                   double x_left, double x_right);

/// max over nodes of |(x_i - s) * (u_i - u_{i-1})/h_i| per singular point and
/// eps, on the subinterval where the corresponding derivative bound holds.
/// Needs solutions at two or more eps values.
std::map<double, std::map<double, double>> derivative_bound_diagnostic(
    const std::vector<GridSolution>& solutions, const std::vector<SingularPoint>& singulars);

}  // namespace tpfem
