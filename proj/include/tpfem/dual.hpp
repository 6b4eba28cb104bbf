#pragma once

#include <variant>
#include <vector>

#include "tpfem/coeff.hpp"
#include "tpfem/mesh.hpp"
#include "tpfem/scaled.hpp"

namespace tpfem {

enum class DualMode { Exact, Tfpm };

/// Raised by the closed-form linear dual solver when the boundary system is
/// too ill-conditioned or the parameters leave the special-function envelope;
/// the caller is expected to re-solve that half with TFPM.
struct DualFallback : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DualBC {
    double left, right;
};

/// psi = w_plus * exp(mu_plus (x - x2)) + w_minus * exp(mu_minus (x - x1)),
/// each exponential anchored at the endpoint where it peaks.
struct ExpRep {
    double mu_plus, mu_minus;
    double w_plus, w_minus;
};

/// psi = exp(sign * z^2/4) * (c1 U(a,t) + c2 V(a,t)), z = (x - x0)/ell and
/// t = z or -z: elements sitting mostly at negative z use the mirrored
/// argument (the equation is even in z) so that the pair stays numerically
/// independent.
struct PcfRep {
    int sign;  // +1 for exp(z^2/4) (pbar slope < 0), -1 for exp(-z^2/4)
    bool mirrored;
    double a;
    double ell, x0;
    Scaled c1, c2;
};

/// Nodal values on the uniform submesh; evaluation re-expands each
/// subinterval in its local exponential pair.
struct TfpmRep {
    int n1 = 0;
    std::vector<double> values;      // size n1 + 1
    bool stability_warning = false;  // some nodal value dipped below -1e-10
};

/// One elementwise solve of the dual equation
///   -eps psi'' - pbar psi' + bhat psi = 0 on [x1, x2]
/// with value boundary conditions; carries the one-sided endpoint derivatives
/// and the element integral the assembly consumes.
struct DualHalf {
    double x1, x2;
    DualBC bc;
    double d_left;   // psi'(x1+)
    double d_right;  // psi'(x2-)
    double mass;     // integral of psi over the element
    double moment1;  // integral of (x - element midpoint) psi
    std::variant<ExpRep, PcfRep, TfpmRep> rep;
    double eps;
    PBar pbar;
    double bhat;

    double value(double x) const;
    double derivative(double x) const;

    /// int f(x) psi(x) dx over the element. The dual factor is integrated in
    /// closed form panel by panel (it may be a boundary-layer spike much
    /// narrower than the element); f is modeled by its tangent per panel.
    double integrate_load(const ScalarFn& f) const;
};

/// Test function psi_i: 1 at node i, 0 at nodes i-1 and i+1, dual solution on
/// each of the two adjacent elements.
struct TestFunction {
    int node_index;
    DualHalf left;   // on [x_{i-1}, x_i], bc (0, 1)
    DualHalf right;  // on [x_i, x_{i+1}], bc (1, 0)
};

/// Constant-coefficient dual: -eps psi'' - c psi' + bhat psi = 0.
DualHalf solve_dual_exact_constant(double eps, double c, double bhat, double x1, double x2,
                                   DualBC bc);

/// Linear-coefficient dual solved through parabolic cylinder functions in the
/// stretched variable. bhat may be nonpositive (the waived-condition runs
/// produce such elements); well-posedness is the caller's concern.
/// Throws DualFallback when the representation cannot be evaluated reliably.
DualHalf solve_dual_exact_linear(double eps, const PBar& pbar, double bhat, double x1, double x2,
                                 DualBC bc);

/// Tailored-finite-point solve on a uniform submesh of n1 intervals: the
/// three-point stencil annihilates the two frozen-coefficient exponentials at
/// each interior node; endpoint derivatives and masses come from re-expanding
/// the nodal solution in the local exponential pair.
DualHalf solve_dual_tfpm(double eps, const PBar& pbar, double bhat, double x1, double x2,
                         DualBC bc, int n1);

/// All interior test functions for the partition. Exact mode dispatches
/// Constant -> exponentials and Linear -> parabolic cylinder representations
/// (TFPM on fallback); tfpm mode always uses TFPM with the given n1.
/// The parallel flavor distributes the (independent) per-node solves over
/// OpenMP threads and is bitwise identical to the serial one.
std::vector<TestFunction> build_test_functions(const PiecewiseCoefficients& coeffs,
                                               const Partition& part, double eps, DualMode mode,
                                               int n1, int* pcf_fallbacks = nullptr);
std::vector<TestFunction> build_test_functions_serial(const PiecewiseCoefficients& coeffs,
                                                      const Partition& part, double eps,
                                                      DualMode mode, int n1,
                                                      int* pcf_fallbacks = nullptr);

}  // namespace tpfem
