#include "tpfem/pcf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace tpfem {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kScaledMaxA = 64.0;  // internal cap for the extended-range path

// ---------------------------------------------------------------------------
// Gamma (Lanczos, g = 7, 9 terms)
// ---------------------------------------------------------------------------

const double kLanczos[9] = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7,
};

double gamma_positive(double z) {
    // z >= 0.5
    double acc = kLanczos[0];
    for (int i = 1; i < 9; ++i) acc += kLanczos[i] / (z - 1.0 + i);
    double t = z + 6.5;
    return std::sqrt(2.0 * kPi) * std::pow(t, z - 0.5) * std::exp(-t) * acc;
}

// sin(pi x), cos(pi x) with exact values at the half-integers; the connection
// coefficients must vanish identically there or reflected evaluations leak a
// spurious growing component.
double sin_pi(double x) {
    double r = std::fmod(x, 2.0);
    if (r < -1.0) r += 2.0;
    else if (r > 1.0) r -= 2.0;
    if (r == 0.0 || r == 1.0 || r == -1.0) return 0.0;
    if (r == 0.5) return 1.0;
    if (r == -0.5) return -1.0;
    return std::sin(kPi * r);
}

double cos_pi(double x) { return sin_pi(x + 0.5); }

}  // namespace

double gamma_fn(double x) {
    if (x >= 0.5) return gamma_positive(x);
    // reflection; infinite at nonpositive integers
    double s = sin_pi(x);
    if (s == 0.0) return std::numeric_limits<double>::infinity();
    return kPi / (s * gamma_positive(1.0 - x));
}

namespace {

// ---------------------------------------------------------------------------
// Values at x = 0 (pole-free closed forms)
// ---------------------------------------------------------------------------

double u_at0(double a) { return kSqrtPi / (std::pow(2.0, 0.5 * a + 0.25) * gamma_fn(0.75 + 0.5 * a)); }
double du_at0(double a) { return -kSqrtPi / (std::pow(2.0, 0.5 * a - 0.25) * gamma_fn(0.25 + 0.5 * a)); }
double v_at0(double a) {
    return std::pow(2.0, 0.5 * a + 0.25) * sin_pi((2.0 * a + 1.0) / 4.0) /
           gamma_fn(0.75 - 0.5 * a);
}
double dv_at0(double a) {
    return std::pow(2.0, 0.5 * a + 0.75) * cos_pi((2.0 * a + 1.0) / 4.0) /
           gamma_fn(0.25 - 0.5 * a);
}

// ---------------------------------------------------------------------------
// Power series about 0: even/odd solutions w1 (w1(0)=1, w1'(0)=0) and w2
// (w2(0)=0, w2'(0)=1) of y'' = (a + x^2/4) y.
// ---------------------------------------------------------------------------

struct SeriesPair {
    double w1, dw1, w2, dw2;
};

SeriesPair weber_series(double a, double x) {
    // Coefficients A_{n+2} = (a A_n + A_{n-2}/4) / ((n+2)(n+1)), run for the
    // even and odd families simultaneously.
    double e0 = 1.0, e2 = a / 2.0;        // even: A_0, A_2 (then slide)
    double o1 = 1.0, o3 = a / 6.0;        // odd:  A_1, A_3
    double x2 = x * x;

    double w1 = e0, dw1 = 0.0;
    double w2 = o1 * x, dw2 = o1;

    // running powers
    double xe = 1.0;  // x^n for even n
    double xo = x;    // x^n for odd n

    double e_prev = 0.0, o_prev = 0.0;  // A_{n-2}
    double en = e0, on = o1;            // A_n (n even resp. odd)
    double e_next = e2, o_next = o3;    // A_{n+2}
    int quiet = 0;
    for (int n = 2; n < 500; n += 2) {
        // advance even chain to order n
        e_prev = en; en = e_next;
        xe *= x2;
        double te = en * xe;
        w1 += te;
        dw1 += en * n * xe / (x == 0.0 ? 1.0 : x);
        e_next = (a * en + 0.25 * e_prev) / ((n + 2.0) * (n + 1.0));

        // advance odd chain to order n+1
        o_prev = on; on = o_next;
        xo *= x2;
        double to = on * xo;
        w2 += to;
        dw2 += on * (n + 1.0) * xo / (x == 0.0 ? 1.0 : x);
        o_next = (a * on + 0.25 * o_prev) / ((n + 3.0) * (n + 2.0));

        double scale = std::max({std::fabs(w1), std::fabs(w2), 1e-300});
        if (std::fabs(te) < 1e-17 * scale && std::fabs(to) < 1e-17 * scale) {
            if (++quiet >= 40) break;
        } else {
            quiet = 0;
        }
    }
    if (x == 0.0) { dw1 = 0.0; dw2 = 1.0; }
    return {w1, dw1, w2, dw2};
}

// Cancellation in the U = u0 w1 + du0 w2 combination caps the usable series
// radius: the partial sums grow like e^{sqrt(a) t} while U decays like
// e^{-sqrt(a) t} (a > 0), and like e^{t^2/2}-ish against an O(1) result in the
// oscillatory a < 0 range.
double series_edge(double a) {
    if (a > 1.0) return std::min(3.5, 6.9 / std::sqrt(a));
    if (a < -1.0) return std::min(3.5, 10.0 / std::sqrt(-a));
    return 3.5;
}
double asym_edge(double a) { return std::max(8.5, std::fabs(a) + 8.0); }

ScaledPcfValue eval_by_series(double a, double x) {
    SeriesPair s = weber_series(a, x);
    double u0 = u_at0(a), du0 = du_at0(a), v0 = v_at0(a), dv0 = dv_at0(a);
    ScaledPcfValue r;
    r.u = Scaled::from_double(u0 * s.w1 + du0 * s.w2);
    r.du = Scaled::from_double(u0 * s.dw1 + du0 * s.dw2);
    r.v = Scaled::from_double(v0 * s.w1 + dv0 * s.w2);
    r.dv = Scaled::from_double(v0 * s.dw1 + dv0 * s.dw2);
    r.regime = PcfRegime::series;
    return r;
}

// ---------------------------------------------------------------------------
// Large-x asymptotic series (x >= asym_edge)
//   U(a,x) =            exp(-x^2/4) x^{-a-1/2} S_U(a,x)
//   V(a,x) = sqrt(2/pi) exp(+x^2/4) x^{+a-1/2} S_V(a,x)
// with S_U = sum (-1)^s (a+1/2)_{2s} / (s! (2x^2)^s), S_V its a -> -a mirror
// without the alternating sign. Truncated at the smallest term.
// ---------------------------------------------------------------------------

double asym_sum(double a, double x, bool for_v) {
    double sum = 1.0, term = 1.0;
    double inv = 1.0 / (2.0 * x * x);
    for (int s = 0; s < 200; ++s) {
        double p1 = for_v ? (0.5 - a + 2.0 * s) : (0.5 + a + 2.0 * s);
        double p2 = p1 + 1.0;
        double next = term * p1 * p2 * inv / (s + 1.0);
        if (!for_v) next = -next;
        if (std::fabs(next) >= std::fabs(term)) break;  // divergence onset
        sum += next;
        term = next;
        if (std::fabs(term) < 1e-17 * std::fabs(sum)) break;
    }
    return sum;
}

Scaled asym_u(double a, double x) {
    double lg = -0.25 * x * x - (a + 0.5) * std::log(x);
    double s = asym_sum(a, x, false);
    return Scaled::from_double(s) * Scaled::from_log(lg);
}

Scaled asym_v(double a, double x) {
    double lg = 0.25 * x * x + (a - 0.5) * std::log(x);
    double s = std::sqrt(2.0 / kPi) * asym_sum(a, x, true);
    return Scaled::from_double(s) * Scaled::from_log(lg);
}

ScaledPcfValue eval_by_asym(double a, double x) {
    ScaledPcfValue r;
    r.u = asym_u(a, x);
    r.v = asym_v(a, x);
    // derivatives through the ladder identities (no cancellation amplification):
    //   U'(a,x) = (x/2) U(a,x) - U(a-1,x)
    //   V'(a,x) = V(a+1,x) - (x/2) V(a,x)
    r.du = Scaled::from_double(0.5 * x) * r.u - asym_u(a - 1.0, x);
    r.dv = asym_v(a + 1.0, x) - Scaled::from_double(0.5 * x) * r.v;
    r.regime = PcfRegime::asymptotic;
    return r;
}

// ---------------------------------------------------------------------------
// Taylor transport: local series of y'' = (a + x^2/4) y about a moving center.
// Used to carry U downward from the asymptotic seed and V upward from the
// series edge through the intermediate zone, each in its stable direction.
// ---------------------------------------------------------------------------

void taylor_step(double a, double x0, double h, double& y, double& dy) {
    const double q0 = a + 0.25 * x0 * x0;
    const double q1 = 0.5 * x0;
    const double q2 = 0.25;
    double c[84];
    c[0] = y;
    c[1] = dy;
    double yn = c[0] + c[1] * h;
    double dyn = c[1];
    double hk = h;  // h^k for the value sum
    for (int k = 0; k + 2 < 84; ++k) {
        double cm1 = k >= 1 ? c[k - 1] : 0.0;
        double cm2 = k >= 2 ? c[k - 2] : 0.0;
        c[k + 2] = (q0 * c[k] + q1 * cm1 + q2 * cm2) / ((k + 2.0) * (k + 1.0));
        hk *= h;
        double tv = c[k + 2] * hk;
        yn += tv;
        dyn += c[k + 2] * (k + 2.0) * hk / h;
        if (std::fabs(tv) < 1e-18 * std::fabs(yn) &&
            std::fabs(c[k + 2] * (k + 2.0) * hk / h) < 1e-18 * std::fabs(dyn) && k > 4)
            break;
    }
    y = yn;
    dy = dyn;
}

struct Transported {
    Scaled y, dy;
};

/// Carries (y, y') from x_from to x_to with running renormalization.
Transported taylor_transport(double a, double x_from, double x_to, Scaled y0, Scaled dy0) {
    double base = std::max(y0.is_zero() ? -1e308 : y0.lg, dy0.is_zero() ? -1e308 : dy0.lg);
    double y = y0.is_zero() ? 0.0 : y0.sgn * std::exp(y0.lg - base);
    double dy = dy0.is_zero() ? 0.0 : dy0.sgn * std::exp(dy0.lg - base);
    double x = x_from;
    int dir = x_to >= x_from ? 1 : -1;
    while (std::fabs(x_to - x) > 1e-14 * (1.0 + std::fabs(x_to))) {
        double hmax = 0.8 / (1.0 + std::sqrt(std::fabs(a) + 0.25 * x * x));
        double h = dir * std::min(hmax, std::fabs(x_to - x));
        taylor_step(a, x, h, y, dy);
        x += h;
        double m = std::max(std::fabs(y), std::fabs(dy));
        if (m > 1e120 || (m > 0.0 && m < 1e-120)) {
            double lm = std::log(m);
            base += lm;
            y *= std::exp(-lm);
            dy *= std::exp(-lm);
        }
    }
    Transported out;
    out.y = Scaled::from_double(y) * Scaled::from_log(base);
    out.dy = Scaled::from_double(dy) * Scaled::from_log(base);
    return out;
}

ScaledPcfValue eval_gap(double a, double x) {
    // U comes down from the asymptotic zone (it grows in that direction),
    // V goes up from the series edge (likewise).
    double ze = asym_edge(a);
    ScaledPcfValue seed_hi = eval_by_asym(a, ze);
    Transported u = taylor_transport(a, ze, x, seed_hi.u, seed_hi.du);

    double xe = series_edge(a);
    ScaledPcfValue seed_lo = eval_by_series(a, xe);
    Transported v = taylor_transport(a, xe, x, seed_lo.v, seed_lo.dv);

    ScaledPcfValue r;
    r.u = u.y;
    r.du = u.dy;
    r.v = v.y;
    r.dv = v.dy;
    r.regime = PcfRegime::series;
    return r;
}

ScaledPcfValue eval_nonnegative(double a, double x) {
    double xe = series_edge(a);
    if (x <= xe) return eval_by_series(a, x);
    if (x >= asym_edge(a)) return eval_by_asym(a, x);
    return eval_gap(a, x);
}

// pi / Gamma(1/2 + a), written pole-free for a <= 0 via the reflection
// pi / Gamma(1/2 + a) = cos(pi a) Gamma(1/2 - a).
Scaled pi_over_gamma_half(double a) {
    if (0.5 + a > 0.25) return Scaled::from_double(kPi / gamma_fn(0.5 + a));
    return Scaled::from_double(cos_pi(a) * gamma_fn(0.5 - a));
}

// cos^2(pi a) Gamma(1/2 + a) / pi  ==  cos(pi a) / Gamma(1/2 - a), pole-free.
Scaled refl_v_coeff(double a) {
    return Scaled::from_double(cos_pi(a) / gamma_fn(0.5 - a));
}

ScaledPcfValue eval_reflect(double a, double x) {
    // x < 0; combine the values at -x > 0.
    double t = -x;
    ScaledPcfValue pv = eval_nonnegative(a, t);
    Scaled s = Scaled::from_double(sin_pi(a));
    Scaled pig = pi_over_gamma_half(a);
    Scaled cv = refl_v_coeff(a);

    ScaledPcfValue r;
    r.u = pig * pv.v - s * pv.u;
    r.du = s * pv.du - pig * pv.dv;
    r.v = s * pv.v + cv * pv.u;
    r.dv = -(s * pv.dv + cv * pv.du);
    r.regime = PcfRegime::reflection;
    return r;
}

}  // namespace

ScaledPcfValue pcf_eval_scaled(double a, double x) {
    if (!(std::fabs(a) <= kScaledMaxA) || !std::isfinite(x)) {
        std::ostringstream os;
        os << "pcf_eval_scaled: parameter a = " << a << " outside |a| <= " << kScaledMaxA;
        throw std::domain_error(os.str());
    }
    if (x >= 0.0) return eval_nonnegative(a, x);
    if (-x <= series_edge(a)) return eval_by_series(a, x);
    return eval_reflect(a, x);
}

PcfValue pcf_eval(double a, double x) {
    if (!(std::fabs(a) <= kPcfMaxA) || !(std::fabs(x) <= kPcfMaxX)) {
        std::ostringstream os;
        os << "pcf_eval: (a, x) = (" << a << ", " << x << ") outside the working envelope |a| <= "
           << kPcfMaxA << ", |x| <= " << kPcfMaxX;
        throw std::domain_error(os.str());
    }
    ScaledPcfValue s = pcf_eval_scaled(a, x);
    auto conv = [&](const Scaled& v, const char* name) {
        double d = v.to_double();
        if (!std::isfinite(d)) {
            std::ostringstream os;
            os << "pcf_eval: " << name << "(" << a << ", " << x << ") overflows double range";
            throw EvaluationError(os.str());
        }
        return d;
    };
    return {conv(s.u, "U"), conv(s.v, "V"), conv(s.du, "U'"), conv(s.dv, "V'"), s.regime};
}

double pcf_shift(double a, double x, int k, PcfFamily family) {
    double target = a + k;
    if (!(std::fabs(a) <= kPcfMaxA) || !(std::fabs(target) <= kPcfMaxA) ||
        !(std::fabs(x) <= kPcfMaxX)) {
        throw std::domain_error("pcf_shift: ladder leaves the working envelope");
    }
    auto direct = [&](double aa) {
        ScaledPcfValue v = pcf_eval_scaled(aa, x);
        Scaled s = family == PcfFamily::U ? v.u : v.v;
        double d = s.to_double();
        if (!std::isfinite(d)) throw EvaluationError("pcf_shift: value overflows double range");
        return d;
    };
    if (k == 0) return direct(a);

    Scaled z = Scaled::from_double(x);
    if (family == PcfFamily::U) {
        if (k > 0) return direct(target);  // upward U-ladder is the unstable direction
        // downward: U(b-1) = x U(b) + (b + 1/2) U(b+1)
        ScaledPcfValue v = pcf_eval_scaled(a, x);
        ScaledPcfValue vp = pcf_eval_scaled(a + 1.0, x);
        Scaled cur = v.u, above = vp.u;
        double b = a;
        for (int i = 0; i < -k; ++i) {
            Scaled below = z * cur + Scaled::from_double(b + 0.5) * above;
            above = cur;
            cur = below;
            b -= 1.0;
        }
        double d = cur.to_double();
        if (!std::isfinite(d)) throw EvaluationError("pcf_shift: value overflows double range");
        return d;
    }
    if (k < 0) return direct(target);  // downward V-ladder is the unstable direction
    // upward: V(b+1) = x V(b) + (b - 1/2) V(b-1)
    ScaledPcfValue v = pcf_eval_scaled(a, x);
    ScaledPcfValue vm = pcf_eval_scaled(a - 1.0, x);
    Scaled cur = v.v, below = vm.v;
    double b = a;
    for (int i = 0; i < k; ++i) {
        Scaled above = z * cur + Scaled::from_double(b - 0.5) * below;
        below = cur;
        cur = above;
        b += 1.0;
    }
    double d = cur.to_double();
    if (!std::isfinite(d)) throw EvaluationError("pcf_shift: value overflows double range");
    return d;
}

namespace {

/// Transported reference evaluation used to measure the asymptotic-series
/// truncation error: U is carried down from a seed well inside the asymptotic
/// zone, V up from the series edge.
ScaledPcfValue reference_for_switch(double a, double x) {
    double seed_x = std::max(asym_edge(a), x) + 6.0;
    ScaledPcfValue hi = eval_by_asym(a, seed_x);
    Transported u = taylor_transport(a, seed_x, x, hi.u, hi.du);

    double xe = series_edge(a);
    ScaledPcfValue lo = eval_by_series(a, xe);
    Transported v = taylor_transport(a, xe, x, lo.v, lo.dv);

    ScaledPcfValue r;
    r.u = u.y;
    r.du = u.dy;
    r.v = v.y;
    r.dv = v.dy;
    r.regime = PcfRegime::series;
    return r;
}

double switch_disagreement(double a, double x) {
    ScaledPcfValue asym = eval_by_asym(a, x);
    ScaledPcfValue ref = reference_for_switch(a, x);
    auto rel = [](const Scaled& got, const Scaled& want) {
        if (want.is_zero()) return got.is_zero() ? 0.0 : 1.0;
        return std::fabs(((got - want) / want).to_double());
    };
    return std::max(rel(asym.u, ref.u), rel(asym.v, ref.v));
}

}  // namespace

double asymptotic_switch(double a) {
    if (!(std::fabs(a) <= kPcfMaxA))
        throw std::domain_error("asymptotic_switch: |a| outside the working envelope");
    const double tol = 1e-10;
    double lo = std::max({series_edge(a) + 0.25, 2.0 * std::sqrt(std::max(0.0, -a)) + 0.5, 4.0});
    double x = lo;
    double prev = lo;
    for (; x < 80.0; x += 0.25) {
        if (switch_disagreement(a, x) <= tol && switch_disagreement(a, x + 0.25) <= tol &&
            switch_disagreement(a, x + 0.5) <= tol)
            break;
        prev = x;
    }
    if (x == lo) return lo;
    // bisect the crossover between the last failing and first passing abscissa
    double bad = prev, good = x;
    for (int it = 0; it < 40; ++it) {
        double mid = 0.5 * (bad + good);
        if (switch_disagreement(a, mid) <= tol) good = mid;
        else bad = mid;
    }
    return good;
}

}  // namespace tpfem
