#pragma once

#include <string>
#include <vector>

#include "tpfem/coeff.hpp"
#include "tpfem/dual.hpp"
#include "tpfem/mesh.hpp"
#include "tpfem/problem.hpp"

namespace tpfem {

/// Tridiagonal Petrov-Galerkin system over the interior nodes. Entries come
/// from nodal flux evaluations (the trials are elementwise linear and the
/// tests satisfy the adjoint equation elementwise, so the bilinear form
/// collapses to boundary terms).
struct TriDiagonalSystem {
    std::vector<double> sub, diag, super, rhs;  // length N-1; sub[0], super[N-2] unused

    /// Flux ingredients per row, kept for diagnostics.
    struct RowProvenance {
        double d_left_own, d_right_own;    // psi_i' at the ends of I_i
        double d_left_next, d_right_next;  // psi_i' at the ends of I_{i+1}
        double p_jump;                     // pbar_i(x_i-) - pbar_{i+1}(x_i+)
    };
    std::vector<RowProvenance> provenance;

    int size() const { return static_cast<int>(diag.size()); }
};

struct MaxPrincipleReport {
    bool is_m_like = false;
    int worst_row = -1;
    std::vector<double> margins;
};

struct SolveInfo {
    DualMode mode = DualMode::Exact;
    int n1 = 0;
    double epsilon = 0.0;
    double seconds_duals = 0.0, seconds_assemble = 0.0, seconds_solve = 0.0;
    MaxPrincipleReport max_principle;
    bool used_pivoting = false;
    int pcf_fallbacks = 0;  // halves the exact mode handed over to TFPM
};

struct GridSolution {
    Partition partition;
    std::vector<double> values;  // size N+1, boundary nodes carry u_L, u_R exactly
    SolveInfo info;
};

TriDiagonalSystem assemble(const PiecewiseCoefficients& coeffs,
                           const std::vector<TestFunction>& tests, const Partition& part,
                           const BoundaryValueProblem& bvp);

/// Thomas elimination; throws SolverError on a vanishing pivot.
std::vector<double> solve_tridiagonal(const TriDiagonalSystem& sys);

/// Row-wise M-matrix test: diag > 0, off-diagonals <= 0 and
/// diag >= |sub| + |super|, all up to 1e-12 * scale.
MaxPrincipleReport check_discrete_max_principle(const TriDiagonalSystem& sys);

struct SolveOptions {
    DualMode mode = DualMode::Exact;
    int n1 = 256;
    enum class Repulsive { Auto, Keep, Drop } repulsive = Repulsive::Auto;
    bool parallel_duals = true;
    int validation_samples = 2048;
    int scan_resolution = 4096;
};

/// The full pipeline: classify singular points, build the partition, the
/// coefficient approximations and the test functions, assemble, and solve.
GridSolution pgfem_solve(const BoundaryValueProblem& bvp, int n, const SolveOptions& opts = {});

}  // namespace tpfem
