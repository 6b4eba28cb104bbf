#include "tpfem/dual.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tpfem/pcf.hpp"
#include "tpfem/quadrature.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tpfem {

namespace {

// ---------------------------------------------------------------------------
// Local exponential pairs (shared by the constant solver and TFPM)
// ---------------------------------------------------------------------------

struct RootPair {
    double lp, lm;  // roots of eps*l^2 - c*l - bhat = 0, lp >= lm
};

/// Cancellation-free roots; throws if they are complex (oscillatory local
/// solutions) or too close to a double root.
RootPair characteristic_roots(double eps, double c, double bhat) {
    double disc = c * c + 4.0 * eps * bhat;
    if (disc <= 1e-14 * std::max(c * c, std::fabs(4.0 * eps * bhat))) {
        std::ostringstream os;
        os << "local dual solutions are oscillatory or degenerate (c = " << c
           << ", bhat = " << bhat << ", eps = " << eps << ")";
        throw SolverError("dual-tfpm", os.str());
    }
    double d = std::sqrt(disc);
    double lp = c >= 0.0 ? (c + d) / (2.0 * eps) : 2.0 * bhat / (d - c);
    double lm = c >= 0.0 ? -2.0 * bhat / (d + c) : (c - d) / (2.0 * eps);
    if (lp < lm) std::swap(lp, lm);
    return {lp, lm};
}

/// psi on [xa, xa + h_ab] (h_ab of either sign) written in the two local
/// exponentials anchored at xa:  psi(xa + t) = C_big e^{g_big t/h_ab} ... all
/// quantities below are arranged so that every exponent evaluated is <= 0 or
/// of moderate size.
struct LocalExpansion {
    double lam_big, lam_small;  // ordered by g = lam * h_ab
    double g_big, g_small;
    double c_big_scaled;  // C_big * e^{g_big}
    double psi_a;         // C_big + C_small

    LocalExpansion(double psi_a_, double psi_b, const RootPair& r, double h_ab) {
        double g_p = r.lp * h_ab, g_m = r.lm * h_ab;
        if (g_p >= g_m) {
            lam_big = r.lp; lam_small = r.lm; g_big = g_p; g_small = g_m;
        } else {
            lam_big = r.lm; lam_small = r.lp; g_big = g_m; g_small = g_p;
        }
        if (std::fabs(g_small) > 700.0)
            throw SolverError("dual-tfpm", "local exponent out of representable range");
        psi_a = psi_a_;
        // written in expm1 form: the plain 1 - e^{g_small - g_big} loses
        // ~1/(dl h) relative digits on fine submeshes
        double numer = (psi_b - psi_a) - psi_a * std::expm1(g_small);
        c_big_scaled = numer / -std::expm1(g_small - g_big);
    }

    double c_big() const { return c_big_scaled * std::exp(-g_big); }
    double c_small() const { return psi_a - c_big(); }

    /// psi'(xa)
    double derivative_at_anchor() const {
        return lam_small * psi_a + c_big() * (lam_big - lam_small);
    }

    /// integral over t in [0, h], h = |h_ab| (only used with h_ab > 0)
    double mass(double h) const {
        // C_big (e^{g_big} - 1)/lam_big  computed as  c_big_scaled (1 - e^{-g_big})/lam_big
        double m_big = c_big_scaled * -std::expm1(-g_big) / lam_big;
        double m_small = lam_small == 0.0 ? c_small() * h
                                          : c_small() * std::expm1(g_small) / lam_small;
        return m_big + m_small;
    }

    /// integral of t * psi over t in [0, h] (only used with h_ab > 0)
    double t_moment(double h) const {
        // C int t e^{lt} dt = C [ (h/l) e^{g} - (e^g - 1)/l^2 ]
        double m_big = c_big_scaled * (h / lam_big + std::expm1(-g_big) / (lam_big * lam_big));
        double m_small = lam_small == 0.0
                             ? c_small() * 0.5 * h * h
                             : c_small() * (h * std::exp(g_small) / lam_small -
                                            std::expm1(g_small) / (lam_small * lam_small));
        return m_big + m_small;
    }

    /// psi(xa + t), t between 0 and h_ab
    double value_at(double t) const {
        return c_big_scaled * std::exp(lam_big * t - g_big) + c_small() * std::exp(lam_small * t);
    }

    double derivative_at(double t) const {
        return lam_big * c_big_scaled * std::exp(lam_big * t - g_big) +
               lam_small * c_small() * std::exp(lam_small * t);
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// Constant-coefficient dual
// ---------------------------------------------------------------------------

DualHalf solve_dual_exact_constant(double eps, double c, double bhat, double x1, double x2,
                                   DualBC bc) {
    if (!(eps > 0.0)) throw ConfigError("solve_dual_exact_constant: eps must be positive");
    if (!(bhat > 0.0))
        throw ConfigError("solve_dual_exact_constant: dual reaction coefficient bhat must be "
                          "positive for well-posedness");
    if (!(x2 > x1)) throw ConfigError("solve_dual_exact_constant: empty element");

    // -eps psi'' - c psi' + bhat psi = 0  =>  roots of eps m^2 + c m - bhat = 0
    RootPair r = characteristic_roots(eps, -c, bhat);
    const double w = x2 - x1;
    const double qp = std::exp(-r.lp * w);  // lp > 0 here (bhat > 0)
    const double qm = std::exp(r.lm * w);
    const double denom = -std::expm1((r.lm - r.lp) * w);  // 1 - qp qm, cancellation-free

    const double wp = (bc.right - qm * bc.left) / denom;
    const double wm = (bc.left - qp * bc.right) / denom;

    DualHalf half;
    half.x1 = x1;
    half.x2 = x2;
    half.bc = bc;
    half.eps = eps;
    half.pbar = PBar::constant(c);
    half.bhat = bhat;
    half.d_left = wp * r.lp * qp + wm * r.lm;
    half.d_right = wp * r.lp + wm * r.lm * qm;
    half.mass = wp * -std::expm1(-r.lp * w) / r.lp + wm * std::expm1(r.lm * w) / r.lm;
    // int (x - m) e^{mu (x - A)} over the element, anchored like the basis
    double m = 0.5 * (x1 + x2);
    auto centered = [&](double mu, double anchor) {
        auto prim = [&](double x) {
            return ((x - m) / mu - 1.0 / (mu * mu)) * std::exp(mu * (x - anchor));
        };
        return prim(x2) - prim(x1);
    };
    half.moment1 = wp * centered(r.lp, x2) + wm * centered(r.lm, x1);
    half.rep = ExpRep{r.lp, r.lm, wp, wm};
    return half;
}

// ---------------------------------------------------------------------------
// Linear-coefficient dual via parabolic cylinder functions
// ---------------------------------------------------------------------------

namespace {

struct PcfBasis {
    // Phi_1 = e^{sign z^2/4} U(a, t), Phi_2 = e^{sign z^2/4} V(a, t) with
    // t = z (or -z when mirrored; the equation is even in z, and mirroring
    // keeps U recessive / V dominant over the element).
    int sign;
    bool mirrored;
    double a, ell, x0;

    double z(double x) const { return (x - x0) / ell; }
    double t_of(double zz) const { return mirrored ? -zz : zz; }
    Scaled prefactor(double zz) const { return Scaled::from_log(sign * zz * zz / 4.0); }

    void values(double x, Scaled& f1, Scaled& f2) const {
        double zz = z(x);
        ScaledPcfValue p = pcf_eval_scaled(a, t_of(zz));
        Scaled pre = prefactor(zz);
        f1 = pre * p.u;
        f2 = pre * p.v;
    }

    // Derivatives through the contiguous-parameter identities:
    //  d/dt [e^{+t^2/4} U(a,t)] = -(a+1/2) e^{+t^2/4} U(a+1,t)
    //  d/dt [e^{+t^2/4} V(a,t)] =          e^{+t^2/4} V(a+1,t)
    //  d/dt [e^{-t^2/4} U(a,t)] = -        e^{-t^2/4} U(a-1,t)
    //  d/dt [e^{-t^2/4} V(a,t)] = (a-1/2)  e^{-t^2/4} V(a-1,t)
    // mirroring flips d/dz by the chain rule.
    void derivatives(double x, Scaled& df1, Scaled& df2) const {
        double zz = z(x);
        double t = t_of(zz);
        ScaledPcfValue p = pcf_eval_scaled(a + sign, t);
        Scaled pre = prefactor(zz);
        Scaled scale = Scaled::from_double((mirrored ? -1.0 : 1.0) / ell);
        if (sign > 0) {
            df1 = Scaled::from_double(-(a + 0.5)) * pre * p.u * scale;
            df2 = pre * p.v * scale;
        } else {
            df1 = -pre * p.u * scale;
            df2 = Scaled::from_double(a - 0.5) * pre * p.v * scale;
        }
    }

    // Antiderivatives in t (valid when the denominators are away from zero):
    //  int e^{+t^2/4} U(a,t) dt = -e^{+t^2/4} U(a-1,t) / (a-1/2)
    //  int e^{+t^2/4} V(a,t) dt = +e^{+t^2/4} V(a-1,t)
    //  int e^{-t^2/4} U(a,t) dt = -e^{-t^2/4} U(a+1,t)
    //  int e^{-t^2/4} V(a,t) dt = +e^{-t^2/4} V(a+1,t) / (a+1/2)
    // mirroring flips the sign (dz = -dt).
    bool ladder_mass_ok() const { return std::fabs(a - sign * 0.5) > 1e-8; }
    void antiderivatives(double x, Scaled& i1, Scaled& i2) const {
        double zz = z(x);
        double t = t_of(zz);
        ScaledPcfValue p = pcf_eval_scaled(a - sign, t);
        Scaled pre = prefactor(zz);
        Scaled flip = Scaled::from_double(mirrored ? -1.0 : 1.0);
        if (sign > 0) {
            i1 = Scaled::from_double(-1.0 / (a - 0.5)) * pre * p.u * flip;
            i2 = pre * p.v * flip;
        } else {
            i1 = -pre * p.u * flip;
            i2 = Scaled::from_double(1.0 / (a + 0.5)) * pre * p.v * flip;
        }
    }

    // First-moment antiderivatives: with t U(a,t) = U(a-1,t) - (a+1/2) U(a+1,t)
    // and t V(a,t) = V(a+1,t) - (a-1/2) V(a-1,t),
    //  int e^{+t^2/4} t U(a,t) dt = e^{+t^2/4} [ U(a,t) - U(a-2,t)/(a-3/2) ]
    //  int e^{+t^2/4} t V(a,t) dt = e^{+t^2/4} [ V(a,t) - (a-1/2) V(a-2,t) ]
    //  int e^{-t^2/4} t U(a,t) dt = e^{-t^2/4} [ (a+1/2) U(a+2,t) - U(a,t) ]
    //  int e^{-t^2/4} t V(a,t) dt = e^{-t^2/4} [ V(a+2,t)/(a+3/2)
    //                                            - (a-1/2)/(a+1/2) V(a,t) ]
    // z-moments: int z Phi dz is the same expression under mirroring (two sign
    // flips, t = -z and dz = -dt, cancel).
    bool ladder_moment_ok() const {
        return std::fabs(a - sign * 1.5) > 1e-8 && std::fabs(a - sign * 0.5) > 1e-8;
    }
    void moment_antiderivatives(double x, Scaled& m1, Scaled& m2) const {
        double zz = z(x);
        double t = t_of(zz);
        ScaledPcfValue p0 = pcf_eval_scaled(a, t);
        ScaledPcfValue p2 = pcf_eval_scaled(a - 2.0 * sign, t);
        Scaled pre = prefactor(zz);
        if (sign > 0) {
            m1 = pre * (p0.u - Scaled::from_double(1.0 / (a - 1.5)) * p2.u);
            m2 = pre * (p0.v - Scaled::from_double(a - 0.5) * p2.v);
        } else {
            m1 = pre * (Scaled::from_double(a + 0.5) * p2.u - p0.u);
            m2 = pre * (Scaled::from_double(1.0 / (a + 1.5)) * p2.v -
                        Scaled::from_double((a - 0.5) / (a + 0.5)) * p0.v);
        }
    }
};

PcfBasis basis_for(double eps, const PBar& pbar, double bhat, double x1, double x2) {
    double slope = pbar.slope;
    PcfBasis basis;
    basis.ell = std::sqrt(eps / std::fabs(slope));
    basis.x0 = pbar.x_star - pbar.value / slope;
    if (slope < 0.0) {
        basis.sign = +1;
        basis.a = bhat / std::fabs(slope) - 0.5;
    } else {
        basis.sign = -1;
        basis.a = bhat / slope + 0.5;
    }
    basis.mirrored = basis.z(x1) + basis.z(x2) < 0.0;
    return basis;
}

double to_finite(const Scaled& s, const char* what) {
    double d = s.to_double();
    if (!std::isfinite(d)) {
        std::ostringstream os;
        os << "exact linear dual: " << what << " is not finite";
        throw DualFallback(os.str());
    }
    return d;
}

}  // namespace

DualHalf solve_dual_exact_linear(double eps, const PBar& pbar, double bhat, double x1, double x2,
                                 DualBC bc) {
    if (!(eps > 0.0)) throw ConfigError("solve_dual_exact_linear: eps must be positive");
    if (pbar.kind != PBar::Kind::Linear || pbar.slope == 0.0)
        throw ConfigError("solve_dual_exact_linear: needs a linear pbar with nonzero slope");
    if (!(x2 > x1)) throw ConfigError("solve_dual_exact_linear: empty element");

    PcfBasis basis = basis_for(eps, pbar, bhat, x1, x2);
    if (std::fabs(basis.a) > 29.0) {
        std::ostringstream os;
        os << "dual parameter a = " << basis.a << " outside the special-function envelope";
        throw DualFallback(os.str());
    }

    DualHalf half;
    half.x1 = x1;
    half.x2 = x2;
    half.bc = bc;
    half.eps = eps;
    half.pbar = pbar;
    half.bhat = bhat;

    if (bc.left == 0.0 && bc.right == 0.0) {
        half.d_left = half.d_right = half.mass = half.moment1 = 0.0;
        half.rep = PcfRep{basis.sign, basis.mirrored, basis.a, basis.ell, basis.x0,
                          Scaled::zero(), Scaled::zero()};
        return half;
    }

    Scaled a11, a12, a21, a22;
    basis.values(x1, a11, a12);
    basis.values(x2, a21, a22);

    Scaled det = a11 * a22 - a12 * a21;
    Scaled perm1 = a11 * a22, perm2 = a12 * a21;
    double kappa = std::max(scaled_abs_ratio(perm1, det), scaled_abs_ratio(perm2, det));
    if (det.is_zero() || !(kappa <= 1e12)) {
        std::ostringstream os;
        os << "boundary system condition " << kappa << " exceeds 1e12";
        throw DualFallback(os.str());
    }

    Scaled v1 = Scaled::from_double(bc.left), v2 = Scaled::from_double(bc.right);
    Scaled c1 = (v1 * a22 - v2 * a12) / det;
    Scaled c2 = (v2 * a11 - v1 * a21) / det;

    Scaled d11, d12, d21, d22;
    basis.derivatives(x1, d11, d12);
    basis.derivatives(x2, d21, d22);
    half.d_left = to_finite(c1 * d11 + c2 * d12, "left endpoint derivative");
    half.d_right = to_finite(c1 * d21 + c2 * d22, "right endpoint derivative");

    half.rep = PcfRep{basis.sign, basis.mirrored, basis.a, basis.ell, basis.x0, c1, c2};

    if (basis.ladder_mass_ok()) {
        Scaled i11, i12, i21, i22;
        basis.antiderivatives(x1, i11, i12);
        basis.antiderivatives(x2, i21, i22);
        Scaled m = Scaled::from_double(basis.ell) *
                   (c1 * (i21 - i11) + c2 * (i22 - i12));
        half.mass = to_finite(m, "mass");
    } else {
        // a at the ladder pole: integrate the (moderately sized) values instead
        const DualHalf& h = half;
        half.mass = adaptive_integrate([&h](double x) { return h.value(x); }, x1, x2, 1e-12);
    }

    const double mid = 0.5 * (x1 + x2);
    if (basis.ladder_moment_ok()) {
        Scaled m11, m12, m21, m22;
        basis.moment_antiderivatives(x1, m11, m12);
        basis.moment_antiderivatives(x2, m21, m22);
        // int (x - mid) psi dx = ell^2 int (z - z_mid) (c1 Phi1 + c2 Phi2) dz
        double zmid = basis.z(mid);
        Scaled zm = Scaled::from_double(basis.ell * basis.ell) *
                    (c1 * (m21 - m11) + c2 * (m22 - m12));
        half.moment1 = to_finite(zm, "moment") - basis.ell * zmid * half.mass;
    } else {
        const DualHalf& h = half;
        half.moment1 = adaptive_integrate(
            [&h, mid](double x) { return (x - mid) * h.value(x); }, x1, x2, 1e-12);
    }
    return half;
}

// ---------------------------------------------------------------------------
// TFPM dual
// ---------------------------------------------------------------------------

namespace {

RootPair tfpm_roots(double eps, const PBar& pbar, double bhat, double x) {
    return characteristic_roots(eps, -pbar(x), bhat);
}

std::vector<double> thomas_solve_local(std::vector<double> sub, std::vector<double> diag,
                                       std::vector<double> super, std::vector<double> rhs) {
    const int n = static_cast<int>(diag.size());
    for (int i = 1; i < n; ++i) {
        if (std::fabs(diag[i - 1]) < 1e-300)
            throw SolverError("dual-tfpm", "tridiagonal breakdown (zero pivot)");
        double m = sub[i] / diag[i - 1];
        diag[i] -= m * super[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    if (std::fabs(diag[n - 1]) < 1e-300)
        throw SolverError("dual-tfpm", "tridiagonal breakdown (zero pivot)");
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = (rhs[i] - super[i] * x[i + 1]) / diag[i];
    return x;
}

}  // namespace

DualHalf solve_dual_tfpm(double eps, const PBar& pbar, double bhat, double x1, double x2,
                         DualBC bc, int n1) {
    if (!(eps > 0.0)) throw ConfigError("solve_dual_tfpm: eps must be positive");
    if (n1 < 8) throw ConfigError("solve_dual_tfpm: needs N1 >= 8");
    if (!(x2 > x1)) throw ConfigError("solve_dual_tfpm: empty element");

    const double h = (x2 - x1) / n1;
    std::vector<double> sub(n1 + 1, 0.0), diag(n1 + 1, 1.0), super(n1 + 1, 0.0), rhs(n1 + 1, 0.0);
    rhs[0] = bc.left;
    rhs[n1] = bc.right;

    for (int j = 1; j < n1; ++j) {
        double yj = x1 + j * h;
        RootPair r = tfpm_roots(eps, pbar, bhat, yj);
        // alpha_- psi_{j-1} + psi_j + alpha_+ psi_{j+1} = 0, the pair chosen to
        // annihilate e^{lp (x - yj)} and e^{lm (x - yj)} on the stencil
        double gmax = std::max(r.lp, r.lm) * h;
        double gmin = std::min(r.lp, r.lm) * h;
        if (gmin > 700.0) throw SolverError("dual-tfpm", "stencil exponent overflow");
        double denom = 1.0 + std::exp(gmin - gmax);
        sub[j] = -std::exp(gmin) / denom;
        super[j] = -std::exp(-gmax) / denom;
    }

    std::vector<double> psi = thomas_solve_local(sub, diag, super, rhs);

    DualHalf half;
    half.x1 = x1;
    half.x2 = x2;
    half.bc = bc;
    half.eps = eps;
    half.pbar = pbar;
    half.bhat = bhat;

    bool warn = false;
    for (double v : psi)
        if (v < -1e-10) warn = true;

    // endpoint derivatives and masses from the local exponential re-expansion,
    // frozen at each subinterval midpoint
    {
        RootPair r0 = tfpm_roots(eps, pbar, bhat, x1 + 0.5 * h);
        LocalExpansion first(psi[0], psi[1], r0, h);
        half.d_left = first.derivative_at_anchor();

        RootPair rn = tfpm_roots(eps, pbar, bhat, x2 - 0.5 * h);
        LocalExpansion last(psi[n1], psi[n1 - 1], rn, -h);
        half.d_right = last.derivative_at_anchor();
    }
    double mass = 0.0, moment = 0.0;
    const double mid = 0.5 * (x1 + x2);
    for (int j = 0; j < n1; ++j) {
        double yj = x1 + j * h;
        RootPair r = tfpm_roots(eps, pbar, bhat, yj + 0.5 * h);
        LocalExpansion e(psi[j], psi[j + 1], r, h);
        double msub = e.mass(h);
        mass += msub;
        moment += (yj - mid) * msub + e.t_moment(h);
    }
    half.mass = mass;
    half.moment1 = moment;

    TfpmRep rep;
    rep.n1 = n1;
    rep.values = std::move(psi);
    rep.stability_warning = warn;
    half.rep = std::move(rep);
    return half;
}

// ---------------------------------------------------------------------------
// Evaluation of stored representations
// ---------------------------------------------------------------------------

double DualHalf::value(double x) const {
    if (const auto* e = std::get_if<ExpRep>(&rep)) {
        return e->w_plus * std::exp(e->mu_plus * (x - x2)) +
               e->w_minus * std::exp(e->mu_minus * (x - x1));
    }
    if (const auto* p = std::get_if<PcfRep>(&rep)) {
        if (p->c1.is_zero() && p->c2.is_zero()) return 0.0;
        double z = (x - p->x0) / p->ell;
        ScaledPcfValue v = pcf_eval_scaled(p->a, p->mirrored ? -z : z);
        Scaled pre = Scaled::from_log(p->sign * z * z / 4.0);
        return (pre * (p->c1 * v.u + p->c2 * v.v)).to_double();
    }
    const auto& t = std::get<TfpmRep>(rep);
    double h = (x2 - x1) / t.n1;
    int j = std::clamp(static_cast<int>((x - x1) / h), 0, t.n1 - 1);
    RootPair r = tfpm_roots(eps, pbar, bhat, x1 + (j + 0.5) * h);
    LocalExpansion e(t.values[j], t.values[j + 1], r, h);
    return e.value_at(x - (x1 + j * h));
}

double DualHalf::derivative(double x) const {
    if (const auto* e = std::get_if<ExpRep>(&rep)) {
        return e->w_plus * e->mu_plus * std::exp(e->mu_plus * (x - x2)) +
               e->w_minus * e->mu_minus * std::exp(e->mu_minus * (x - x1));
    }
    if (const auto* p = std::get_if<PcfRep>(&rep)) {
        if (p->c1.is_zero() && p->c2.is_zero()) return 0.0;
        PcfBasis basis{p->sign, p->mirrored, p->a, p->ell, p->x0};
        Scaled d1, d2;
        basis.derivatives(x, d1, d2);
        return (p->c1 * d1 + p->c2 * d2).to_double();
    }
    const auto& t = std::get<TfpmRep>(rep);
    double h = (x2 - x1) / t.n1;
    int j = std::clamp(static_cast<int>((x - x1) / h), 0, t.n1 - 1);
    RootPair r = tfpm_roots(eps, pbar, bhat, x1 + (j + 0.5) * h);
    LocalExpansion e(t.values[j], t.values[j + 1], r, h);
    return e.derivative_at(x - (x1 + j * h));
}

// ---------------------------------------------------------------------------
// Load integration
// ---------------------------------------------------------------------------

namespace {

/// Sum of f(panel mid) * panel_mass + f'(panel mid) * panel_moment with the
/// slope taken from neighbouring midpoints.
double combine_load_panels(const ScalarFn& f, const std::vector<double>& mids,
                           const std::vector<double>& masses,
                           const std::vector<double>& moments) {
    const std::size_t k = mids.size();
    std::vector<double> fv(k);
    for (std::size_t j = 0; j < k; ++j) fv[j] = f(mids[j]);
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        std::size_t lo = j > 0 ? j - 1 : j;
        std::size_t hi = j + 1 < k ? j + 1 : j;
        double slope = lo == hi ? 0.0 : (fv[hi] - fv[lo]) / (mids[hi] - mids[lo]);
        acc += fv[j] * masses[j] + slope * moments[j];
    }
    return acc;
}

/// int e^{mu (x-A)} and int (x-pm) e^{mu (x-A)} over [s1, s2].
void exp_panel(double mu, double anchor, double s1, double s2, double& mass, double& moment) {
    double d = s2 - s1;
    double base = std::exp(mu * (s1 - anchor));
    if (std::fabs(mu * d) < 1e-8) {
        mass = base * d * (1.0 + 0.5 * mu * d);
        moment = base * mu * d * d * d / 12.0;
        return;
    }
    double e1 = std::expm1(mu * d);
    mass = base * e1 / mu;
    // int (t - d/2) e^{mu t} dt over [0, d]
    double j1 = d * std::exp(mu * d) / mu - e1 / (mu * mu);
    moment = base * (j1 - 0.5 * d * e1 / mu);
}

}  // namespace

double DualHalf::integrate_load(const ScalarFn& f) const {
    if (bc.left == 0.0 && bc.right == 0.0) return 0.0;

    if (const auto* e = std::get_if<ExpRep>(&rep)) {
        const int k = 24;
        std::vector<double> mids(k), masses(k), moments(k);
        double w = (x2 - x1) / k;
        for (int j = 0; j < k; ++j) {
            double s1 = x1 + j * w, s2 = s1 + w;
            mids[j] = 0.5 * (s1 + s2);
            double mp, qp, mm, qm;
            exp_panel(e->mu_plus, x2, s1, s2, mp, qp);
            exp_panel(e->mu_minus, x1, s1, s2, mm, qm);
            masses[j] = e->w_plus * mp + e->w_minus * mm;
            moments[j] = e->w_plus * qp + e->w_minus * qm;
        }
        return combine_load_panels(f, mids, masses, moments);
    }

    if (const auto* p = std::get_if<PcfRep>(&rep)) {
        PcfBasis basis{p->sign, p->mirrored, p->a, p->ell, p->x0};
        if (!basis.ladder_mass_ok() || !basis.ladder_moment_ok()) {
            const DualHalf& h = *this;
            return adaptive_integrate([&](double x) { return f(x) * h.value(x); }, x1, x2, 1e-12);
        }
        const int k = 16;
        std::vector<double> mids(k), masses(k), moments(k);
        std::vector<Scaled> iu(k + 1), iv(k + 1), mu(k + 1), mv(k + 1);
        double w = (x2 - x1) / k;
        for (int j = 0; j <= k; ++j) {
            double xe = x1 + j * w;
            basis.antiderivatives(xe, iu[j], iv[j]);
            basis.moment_antiderivatives(xe, mu[j], mv[j]);
        }
        Scaled ell = Scaled::from_double(basis.ell);
        Scaled ell2 = Scaled::from_double(basis.ell * basis.ell);
        for (int j = 0; j < k; ++j) {
            mids[j] = x1 + (j + 0.5) * w;
            Scaled pm = ell * (p->c1 * (iu[j + 1] - iu[j]) + p->c2 * (iv[j + 1] - iv[j]));
            Scaled zm = ell2 * (p->c1 * (mu[j + 1] - mu[j]) + p->c2 * (mv[j + 1] - mv[j]));
            masses[j] = pm.to_double();
            moments[j] = zm.to_double() - basis.ell * basis.z(mids[j]) * masses[j];
            if (!std::isfinite(masses[j]) || !std::isfinite(moments[j])) {
                const DualHalf& h = *this;
                return adaptive_integrate([&](double x) { return f(x) * h.value(x); }, x1, x2,
                                          1e-12);
            }
        }
        return combine_load_panels(f, mids, masses, moments);
    }

    const auto& t = std::get<TfpmRep>(rep);
    const int n1 = t.n1;
    double h = (x2 - x1) / n1;
    std::vector<double> mids(n1), masses(n1), moments(n1);
    for (int j = 0; j < n1; ++j) {
        double yj = x1 + j * h;
        mids[j] = yj + 0.5 * h;
        RootPair r = tfpm_roots(eps, pbar, bhat, mids[j]);
        LocalExpansion e(t.values[j], t.values[j + 1], r, h);
        masses[j] = e.mass(h);
        moments[j] = e.t_moment(h) - 0.5 * h * masses[j];
    }
    return combine_load_panels(f, mids, masses, moments);
}

// ---------------------------------------------------------------------------
// Test-function construction
// ---------------------------------------------------------------------------

namespace {

/// Submesh size actually needed on this element: n1 caps the budget, but an
/// element much wider than the sharpest local solution scale keeps the full
/// count while a smooth one gets by with a handful of points. (Over-refining
/// smooth elements only amplifies the roundoff of the endpoint-derivative
/// recovery, which works from differences of nearby nodal values.)
int tfpm_resolution(double eps, const PBar& pbar, double bhat, double x1, double x2, int n1) {
    double lam = 0.0;
    for (double x : {x1, 0.5 * (x1 + x2), x2}) {
        try {
            RootPair r = characteristic_roots(eps, -pbar(x), bhat);
            lam = std::max({lam, std::fabs(r.lp), std::fabs(r.lm)});
        } catch (const SolverError&) {
            return n1;  // let the actual solve report the failure
        }
    }
    double scaled = (x2 - x1) * lam;
    int need = static_cast<int>(std::ceil(n1 * std::min(1.0, scaled)));
    return std::clamp(need, 8, std::max(8, n1));
}

DualHalf solve_half(const PiecewiseCoefficients& coeffs, const Partition& part, double eps,
                    DualMode mode, int n1, int element, DualBC bc, int* fallbacks) {
    const PBar& pbar = coeffs.pbar[element];
    double bhat = coeffs.bhat(element);
    double x1 = part.nodes[element], x2 = part.nodes[element + 1];

    if (mode == DualMode::Tfpm)
        return solve_dual_tfpm(eps, pbar, bhat, x1, x2, bc,
                               tfpm_resolution(eps, pbar, bhat, x1, x2, n1));

    if (pbar.kind == PBar::Kind::Constant)
        return solve_dual_exact_constant(eps, pbar.c, bhat, x1, x2, bc);
    try {
        return solve_dual_exact_linear(eps, pbar, bhat, x1, x2, bc);
    } catch (const DualFallback&) {
        if (fallbacks) ++*fallbacks;
        return solve_dual_tfpm(eps, pbar, bhat, x1, x2, bc,
                               tfpm_resolution(eps, pbar, bhat, x1, x2, n1));
    }
}

std::vector<TestFunction> build_impl(const PiecewiseCoefficients& coeffs, const Partition& part,
                                     double eps, DualMode mode, int n1, bool parallel,
                                     int* pcf_fallbacks) {
    const int n = part.n_elements();
    if (static_cast<int>(coeffs.pbar.size()) != n)
        throw ConfigError("build_test_functions: coefficients/partition mismatch");

    std::vector<TestFunction> tests(n - 1);
    std::exception_ptr err;
    int total_fallbacks = 0;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel) reduction(+ : total_fallbacks)
#endif
    for (int i = 1; i <= n - 1; ++i) {
        try {
            int fb = 0;
            TestFunction tf;
            tf.node_index = i;
            tf.left = solve_half(coeffs, part, eps, mode, n1, i - 1, DualBC{0.0, 1.0}, &fb);
            tf.right = solve_half(coeffs, part, eps, mode, n1, i, DualBC{1.0, 0.0}, &fb);
            tests[i - 1] = std::move(tf);
            total_fallbacks += fb;
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    if (pcf_fallbacks) *pcf_fallbacks = total_fallbacks;
    return tests;
}

}  // namespace

std::vector<TestFunction> build_test_functions(const PiecewiseCoefficients& coeffs,
                                               const Partition& part, double eps, DualMode mode,
                                               int n1, int* pcf_fallbacks) {
    return build_impl(coeffs, part, eps, mode, n1, true, pcf_fallbacks);
}

std::vector<TestFunction> build_test_functions_serial(const PiecewiseCoefficients& coeffs,
                                                      const Partition& part, double eps,
                                                      DualMode mode, int n1, int* pcf_fallbacks) {
    return build_impl(coeffs, part, eps, mode, n1, false, pcf_fallbacks);
}

}  // namespace tpfem
