#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tpfem/mesh.hpp"

namespace tpfem {

/// max_i |u_i|
double linf_h(const std::vector<double>& values);

/// sqrt( sum_i u_i^2 (h_i + h_{i+1})/2 ) with h_0 = h_{N+1} = 0.
double l2_h(const std::vector<double>& values, const Partition& part);

/// sqrt( l2^2 + eps * sum_i ((u_i - u_{i-1})/h_i)^2 h_i ).
double energy_h(const std::vector<double>& values, const Partition& part, double eps);

/// Reference a computed solution is compared against: either a grid function
/// on a finer nested grid, or a closed-form solution.
struct GridReference {
    Partition grid;
    std::vector<double> values;
};
using ExactReference = std::function<double(double)>;
using Reference = std::variant<GridReference, ExactReference>;

/// Reference values restricted to the nodes of `part` (no interpolation;
/// throws EvaluationError if the grids are not nested).
std::vector<double> restrict_reference(const Reference& ref, const Partition& part);

struct ErrorRow {
    double eps;
    int n;
    double linf, l2, energy;
    std::optional<double> rate_linf, rate_l2, rate_energy;
};

struct ErrorReport {
    std::vector<ErrorRow> rows;  // grouped by eps, N ascending
    std::string reference_kind;
};

struct GridSolution;  // assemble.hpp

/// Errors of each solution against the reference for its eps, with
/// rate_N = log2(e_N / e_2N) attached to the finer row of each pair.
ErrorReport error_report(const std::vector<GridSolution>& solutions,
                         const std::function<Reference(double eps)>& reference_for_eps,
                         std::string reference_kind = "");

}  // namespace tpfem
