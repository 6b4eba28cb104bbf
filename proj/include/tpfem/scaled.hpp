#pragma once

#include <cmath>
#include <limits>

namespace tpfem {

/// Sign/log representation of a real number: value = sgn * exp(lg).
///
/// The dual problems produce exponentials like exp(z^2/4) with z ~ 1/sqrt(eps),
/// far outside double range. All intermediate dual-solver quantities are kept
/// in this form; conversion to double happens only for final values that are
/// known to be of moderate size.
struct Scaled {
    double lg = -std::numeric_limits<double>::infinity();  // log of magnitude
    double sgn = 0.0;                                      // -1, 0, +1

    Scaled() = default;
    Scaled(double log_magnitude, double sign) : lg(log_magnitude), sgn(sign) {}

    static Scaled zero() { return {}; }

    static Scaled from_double(double v) {
        if (v == 0.0) return zero();
        return {std::log(std::fabs(v)), v > 0 ? 1.0 : -1.0};
    }

    /// exp(log_magnitude) with the given sign (+1 unless stated).
    static Scaled from_log(double log_magnitude, double sign = 1.0) {
        return {log_magnitude, sign};
    }

    bool is_zero() const { return sgn == 0.0; }

    /// May overflow to +/-inf; callers that care must check isfinite.
    double to_double() const {
        if (sgn == 0.0) return 0.0;
        return sgn * std::exp(lg);
    }

    friend Scaled operator*(const Scaled& a, const Scaled& b) {
        if (a.is_zero() || b.is_zero()) return zero();
        return {a.lg + b.lg, a.sgn * b.sgn};
    }

    friend Scaled operator/(const Scaled& a, const Scaled& b) {
        if (a.is_zero()) return zero();
        return {a.lg - b.lg, a.sgn * b.sgn};
    }

    friend Scaled operator-(const Scaled& a) { return {a.lg, -a.sgn}; }

    friend Scaled operator+(const Scaled& a, const Scaled& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        const Scaled& big = (a.lg >= b.lg) ? a : b;
        const Scaled& small = (a.lg >= b.lg) ? b : a;
        // value = exp(big.lg) * (big.sgn + small.sgn * exp(small.lg - big.lg))
        double m = big.sgn + small.sgn * std::exp(small.lg - big.lg);
        if (m == 0.0) return zero();
        return {big.lg + std::log(std::fabs(m)), m > 0 ? 1.0 : -1.0};
    }

    friend Scaled operator-(const Scaled& a, const Scaled& b) { return a + (-b); }

    Scaled& operator*=(const Scaled& b) { return *this = *this * b; }
    Scaled& operator+=(const Scaled& b) { return *this = *this + b; }
};

inline Scaled operator*(double a, const Scaled& b) { return Scaled::from_double(a) * b; }
inline Scaled operator*(const Scaled& a, double b) { return a * Scaled::from_double(b); }

/// |a| / |b| as a plain double (inf if it overflows); used for condition checks.
inline double scaled_abs_ratio(const Scaled& a, const Scaled& b) {
    if (a.is_zero()) return 0.0;
    if (b.is_zero()) return std::numeric_limits<double>::infinity();
    return std::exp(a.lg - b.lg);
}

}  // namespace tpfem
