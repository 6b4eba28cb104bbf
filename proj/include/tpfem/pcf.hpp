#pragma once

#include "tpfem/errors.hpp"
#include "tpfem/scaled.hpp"

namespace tpfem {

/// Weber parabolic cylinder functions U(a,x), V(a,x): the standard solution
/// pair of y'' = (a + x^2/4) y with Wronskian U V' - U' V = sqrt(2/pi).
///
/// Evaluation switches between the power series about 0, Taylor transport
/// across the intermediate zone (recessive direction stepped toward growth),
/// and the large-x asymptotic series; large negative x goes through the
/// U(a,-x) / V(a,-x) connection formulas.

enum class PcfRegime { series, asymptotic, reflection };

struct PcfValue {
    double u, v, du, dv;
    PcfRegime regime;
};

/// Extended-range variant for dual solves at arguments where exp(x^2/4)
/// overflows a double.
struct ScaledPcfValue {
    Scaled u, v, du, dv;
    PcfRegime regime;
};

inline constexpr double kPcfMaxA = 30.0;  // working envelope in a
inline constexpr double kPcfMaxX = 60.0;  // working envelope in x (plain eval)

/// U, V and derivatives to >= 10 significant digits inside the envelope.
/// Throws std::domain_error outside it and EvaluationError if a value
/// overflows double range.
PcfValue pcf_eval(double a, double x);

/// Same evaluation without the |x| cap; values carried in sign/log form.
ScaledPcfValue pcf_eval_scaled(double a, double x);

enum class PcfFamily { U, V };

/// U(a+k, x) (or V) through the three-term ladder in a, always walked in its
/// stable direction (downward for U, upward for V); the opposite direction
/// delegates to direct evaluation.
double pcf_shift(double a, double x, int k, PcfFamily family = PcfFamily::U);

/// Measured crossover abscissa beyond which the asymptotic series agrees with
/// the series/transported evaluation to 1e-10 relative.
double asymptotic_switch(double a);

/// Lanczos Gamma, accurate to ~1e-13 relative; used by the connection
/// formulas and exposed for tests.
double gamma_fn(double x);

}  // namespace tpfem
