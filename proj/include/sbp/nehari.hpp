#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "sbp/energy.hpp"
#include "sbp/errors.hpp"
#include "sbp/grid.hpp"

namespace sbp {

// --- fibering map ---------------------------------------------------------

/// Quartic decomposition of the fibering map h_u(t) = J(tu):
/// h(t) = (t^2/2) A + (q^2 t^4/4) B - int F(tu), with A = ||u||^2 and
/// B = int phi_u u^2 precomputed; only the nonlinear integral depends on t.
class FiberCache {
public:
    FiberCache(const Problem& p, const ScalarField& u)
        : problem_(p), u_(u), A_(p.h1v(u)), B_(p.nonlocal_coupling(u)) {
        if (A_ < 1e-24) throw SolveError("fibering: field is numerically zero");
    }

    double A() const { return A_; }
    double B() const { return B_; }

    double h(double t) const {
        const double q = problem_.params().q;
        return 0.5 * t * t * A_ + 0.25 * q * q * t * t * t * t * B_ - F_of(t);
    }
    double dh(double t) const {
        const double q = problem_.params().q;
        return t * A_ + q * q * t * t * t * B_ - problem_.fu_integral(u_, t);
    }
    double ddh(double t) const {
        const double q = problem_.params().q;
        return A_ + 3.0 * q * q * t * t * B_ - problem_.fprime_u2_integral(u_, t);
    }
    /// Natural residual scale at t: t||u||^2 + int |f(tu) u|.
    double scale(double t) const {
        long double s = 0.0L;
        for (double v : u_.values())
            s += std::abs(static_cast<long double>(f_eval(problem_.params().f, t * v)) * v);
        return t * A_ + static_cast<double>(s) * u_.grid().cell_volume();
    }

private:
    double F_of(double t) const {
        long double s = 0.0L;
        for (double v : u_.values()) s += F_eval(problem_.params().f, t * v);
        return static_cast<double>(s) * u_.grid().cell_volume();
    }

    const Problem& problem_;
    const ScalarField& u_;
    double A_;
    double B_;
};

/// h_u(t) = J(tu) and its derivative at a single t.
inline std::pair<double, double> fibering(const Problem& p, const ScalarField& u, double t) {
    if (!(t > 0.0)) throw InvalidParameter("fibering: t must be positive");
    FiberCache c(p, u);
    return {c.h(t), c.dh(t)};
}

struct FiberingDiagnostics {
    double t_star = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    int iterations = 0;
    // sampled sign of h' on a log grid around t_star: (t, sign)
    std::vector<std::pair<double, int>> sign_samples;
};

struct GroundProjection {
    double t = 0.0;
    ScalarField field;
    FiberingDiagnostics diag;
};

/// Root of h'_u on (0, inf): doubling/halving bracket from t = 1, bisection
/// to relative width 1e-3, then Newton polish to |h'| <= tol * scale.
inline double fiber_root(const FiberCache& c, double tol, FiberingDiagnostics& diag) {
    double lo = 0.0, hi = 0.0;
    double t = 1.0;
    double d = c.dh(t);
    if (d > 0.0) {
        lo = t;
        for (int i = 0; i < 60 && d > 0.0; ++i) {
            t *= 2.0;
            d = c.dh(t);
            ++diag.iterations;
            if (d > 0.0) lo = t;
        }
        hi = t;
        if (d > 0.0)
            throw SolveError("project_ground: no sign change after 60 doublings "
                             "(nonlinearity may violate superquarticity)");
    } else {
        hi = t;
        for (int i = 0; i < 60 && d <= 0.0; ++i) {
            t *= 0.5;
            d = c.dh(t);
            ++diag.iterations;
            if (d <= 0.0) hi = t;
        }
        lo = t;
        if (d <= 0.0)
            throw SolveError("project_ground: no sign change after 60 halvings");
    }

    // bisection to relative width 1e-3
    while (hi - lo > 1e-3 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (c.dh(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
        ++diag.iterations;
    }

    // Newton polish, falling back to bisection when a step leaves the bracket
    double ts = 0.5 * (lo + hi);
    for (int i = 0; i < 80; ++i) {
        const double dv = c.dh(ts);
        if (std::abs(dv) <= tol * c.scale(ts)) break;
        if (dv > 0.0)
            lo = std::max(lo, ts);
        else
            hi = std::min(hi, ts);
        const double curv = c.ddh(ts);
        double next = (curv != 0.0) ? ts - dv / curv : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        ts = next;
        ++diag.iterations;
    }

    diag.t_star = ts;
    diag.bracket_lo = lo;
    diag.bracket_hi = hi;
    for (int i = -8; i <= 8; ++i) {
        if (i == 0) continue;
        const double tt = ts * std::pow(2.0, i / 2.0);
        diag.sign_samples.emplace_back(tt, c.dh(tt) > 0.0 ? 1 : -1);
    }
    return ts;
}

/// Unique Nehari projection: t_u with h'_u(t_u) = 0 and the field t_u * u.
inline GroundProjection project_ground(const Problem& p, const ScalarField& u,
                                       double tol = 1e-10) {
    FiberCache c(p, u);
    FiberingDiagnostics diag;
    const double ts = fiber_root(c, tol, diag);
    return {ts, ts * u, diag};
}

// --- sign split and nodal projection --------------------------------------

/// Nodewise w+ = max(w, 0), w- = min(w, 0); w = w+ + w- bit-exactly.
inline std::pair<ScalarField, ScalarField> sign_split(const ScalarField& w) {
    ScalarField wp(w.grid_ptr()), wm(w.grid_ptr());
    for (std::size_t i = 0; i < w.size(); ++i) {
        wp[i] = std::max(0.0, w[i]);
        wm[i] = std::min(0.0, w[i]);
    }
    return {std::move(wp), std::move(wm)};
}

/// Precomputed quadratic/quartic form values of the two-parameter system
/// xi(t,s) = (<J'(t w+ + s w-), t w+>, <J'(t w+ + s w-), s w->).
/// cross_grad is the discrete int grad(w+).grad(w-): zero in the continuum,
/// but the forward-difference form picks up one term per lattice edge that
/// crosses the nodal interface, and the decomposition only matches the
/// discrete pairing exactly when it is kept.
struct NodalCoefficients {
    double Aplus = 0.0;       // ||w+||^2
    double Aminus = 0.0;      // ||w-||^2
    double cross_grad = 0.0;  // int grad(w+).grad(w-)
    double Bpp = 0.0;         // int phi_{w+} (w+)^2
    double Bmm = 0.0;         // int phi_{w-} (w-)^2
    double Bpm = 0.0;         // int phi_{w-} (w+)^2 = int phi_{w+} (w-)^2
};

class NodalSystem {
public:
    NodalSystem(const Problem& p, ScalarField wp, ScalarField wm)
        : problem_(p), wp_(std::move(wp)), wm_(std::move(wm)) {
        c_.Aplus = p.h1v(wp_);
        c_.Aminus = p.h1v(wm_);
        if (c_.Aplus < 1e-20 || c_.Aminus < 1e-20)
            throw SolveError("nodal projection: a sign part is numerically zero");
        c_.cross_grad = inner(wp_, fd_neg_laplacian(wm_));
        const double q = p.params().q;
        if (q != 0.0) {
            const ScalarField phi_p = p.kernel().solve_phi(wp_);
            const ScalarField phi_m = p.kernel().solve_phi(wm_);
            c_.Bpp = coupling(wp_, phi_p);
            c_.Bmm = coupling(wm_, phi_m);
            c_.Bpm = coupling(wp_, phi_m);
        }
    }

    /// J(t w+ + s w-) through the coefficient decomposition (exact nodewise).
    EnergyBreakdown energy(double t, double s) const {
        const double q2 = sq(problem_.params().q);
        EnergyBreakdown e;
        e.kinetic_potential =
            0.5 * (t * t * c_.Aplus + 2.0 * t * s * c_.cross_grad + s * s * c_.Aminus);
        e.nonlocal = 0.25 * q2 *
                     (t * t * t * t * c_.Bpp + 2.0 * t * t * s * s * c_.Bpm +
                      s * s * s * s * c_.Bmm);
        long double F = 0.0L;
        for (double v : wp_.values()) F += F_eval(problem_.params().f, t * v);
        for (double v : wm_.values()) F += F_eval(problem_.params().f, s * v);
        e.nonlinear = static_cast<double>(F) * wp_.grid().cell_volume();
        e.total = e.kinetic_potential + e.nonlocal - e.nonlinear;
        return e;
    }

    const NodalCoefficients& coeffs() const { return c_; }
    const ScalarField& wplus() const { return wp_; }
    const ScalarField& wminus() const { return wm_; }

    double xi1(double t, double s) const {
        const double q2 = sq(problem_.params().q);
        return t * t * c_.Aplus + t * s * c_.cross_grad +
               q2 * (t * t * t * t * c_.Bpp + t * t * s * s * c_.Bpm) -
               t * problem_.fu_integral(wp_, t);
    }
    double xi2(double t, double s) const {
        const double q2 = sq(problem_.params().q);
        return s * s * c_.Aminus + t * s * c_.cross_grad +
               q2 * (s * s * s * s * c_.Bmm + s * s * t * t * c_.Bpm) -
               s * problem_.fu_integral(wm_, s);
    }

    // Jacobian entries
    double dxi1_dt(double t, double s) const {
        const double q2 = sq(problem_.params().q);
        return 2.0 * t * c_.Aplus + s * c_.cross_grad +
               q2 * (4.0 * t * t * t * c_.Bpp + 2.0 * t * s * s * c_.Bpm) -
               problem_.fu_integral(wp_, t) - t * problem_.fprime_u2_integral(wp_, t);
    }
    double dxi1_ds(double t, double s) const {
        const double q2 = sq(problem_.params().q);
        return t * c_.cross_grad + 2.0 * q2 * t * t * s * c_.Bpm;
    }
    double dxi2_ds(double t, double s) const {
        const double q2 = sq(problem_.params().q);
        return 2.0 * s * c_.Aminus + t * c_.cross_grad +
               q2 * (4.0 * s * s * s * c_.Bmm + 2.0 * s * t * t * c_.Bpm) -
               problem_.fu_integral(wm_, s) - s * problem_.fprime_u2_integral(wm_, s);
    }
    double dxi2_dt(double t, double s) const {
        const double q2 = sq(problem_.params().q);
        return s * c_.cross_grad + 2.0 * q2 * s * s * t * c_.Bpm;
    }

    double scale(double t, double s) const {
        return std::max(t * t * c_.Aplus + std::abs(t * problem_.fu_integral(wp_, t)),
                        s * s * c_.Aminus + std::abs(s * problem_.fu_integral(wm_, s)));
    }

private:
    static double sq(double x) { return x * x; }
    const Problem& problem_;
    ScalarField wp_;
    ScalarField wm_;
    NodalCoefficients c_;
};

struct NodalProjection {
    double t;
    double s;
    ScalarField field;
    NodalCoefficients coeffs;
    double box_lo;  // Miranda box [r, R]^2
    double box_hi;
    int iterations;
    double residual;  // ||xi||_inf / scale at the returned point
};

struct NodalRoot {
    double t;
    double s;
    double box_lo;
    double box_hi;
    int iterations;
    double residual;
};

/// Zero of xi on (0, inf)^2: Miranda box on the diagonal, then damped 2D
/// Newton with coordinate bisection fallback.
inline NodalRoot nodal_root(const NodalSystem& sys, double tol = 1e-10) {
    // Miranda box from the diagonal; the monotone structure of xi makes the
    // diagonal signs control the box edges.
    double r = 1.0, R = 1.0;
    {
        int guard = 0;
        while (!(sys.xi1(r, r) > 0.0 && sys.xi2(r, r) > 0.0)) {
            r *= 0.5;
            if (++guard > 60) throw SolveError("nodal projection: lower Miranda edge not found");
        }
        guard = 0;
        while (!(sys.xi1(R, R) < 0.0 && sys.xi2(R, R) < 0.0)) {
            R *= 2.0;
            if (++guard > 60)
                throw SolveError("nodal projection: upper Miranda edge not found "
                                 "(nonlinearity may violate superquarticity)");
        }
    }

    // start on the diagonal: bisect xi1 + xi2, which changes sign across [r, R]
    double lo = r, hi = R;
    for (int k = 0; k < 60 && hi - lo > 1e-3 * hi; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (sys.xi1(mid, mid) + sys.xi2(mid, mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    double t = 0.5 * (lo + hi), s = t;
    double f1 = sys.xi1(t, s), f2 = sys.xi2(t, s);
    auto norm_inf = [](double a, double b) { return std::max(std::abs(a), std::abs(b)); };

    bool converged = false;
    int iterations = 0;
    for (int it = 0; it < 200; ++it) {
        const double sc = sys.scale(t, s);
        if (norm_inf(f1, f2) <= tol * sc) {
            converged = true;
            break;
        }
        const double a11 = sys.dxi1_dt(t, s), a12 = sys.dxi1_ds(t, s);
        const double a21 = sys.dxi2_dt(t, s), a22 = sys.dxi2_ds(t, s);
        const double det = a11 * a22 - a12 * a21;
        double dt, ds;
        if (std::abs(det) > 1e-300) {
            dt = -(a22 * f1 - a12 * f2) / det;
            ds = -(-a21 * f1 + a11 * f2) / det;
        } else {
            dt = -f1 / (std::abs(a11) > 1e-300 ? a11 : 1.0);
            ds = -f2 / (std::abs(a22) > 1e-300 ? a22 : 1.0);
        }
        // damping: keep (t,s) inside the Miranda box (the trivial zero at the
        // origin also attracts Newton) and require the residual to shrink
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k < 40; ++k) {
            const double tn = std::clamp(t + lambda * dt, r, R);
            const double sn = std::clamp(s + lambda * ds, r, R);
            if (tn > 0.0 && sn > 0.0) {
                const double g1 = sys.xi1(tn, sn), g2 = sys.xi2(tn, sn);
                if (norm_inf(g1, g2) < norm_inf(f1, f2)) {
                    t = tn;
                    s = sn;
                    f1 = g1;
                    f2 = g2;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            // Gauss-Seidel fallback, run to convergence: alternately solve
            // xi1 = 0 in t and xi2 = 0 in s by global bisection. A single
            // sweep is not enough -- the norm-decrease rule above can pull
            // the next Newton step back into a clamped corner where ||xi||
            // is locally small but nonzero.
            auto solve1d = [&](std::function<double(double)> g, double x) {
                double lo = x, hi = x;
                if (g(x) > 0.0) {
                    while (g(hi) > 0.0 && hi < 1e18) hi *= 2.0;
                } else {
                    while (g(lo) <= 0.0 && lo > 1e-18) lo *= 0.5;
                }
                for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
                    const double mid = 0.5 * (lo + hi);
                    if (g(mid) > 0.0)
                        lo = mid;
                    else
                        hi = mid;
                }
                return 0.5 * (lo + hi);
            };
            for (int sweep = 0; sweep < 100; ++sweep) {
                t = solve1d([&](double x) { return sys.xi1(x, s); }, t);
                s = solve1d([&](double x) { return sys.xi2(t, x); }, s);
                f1 = sys.xi1(t, s);
                f2 = sys.xi2(t, s);
                if (norm_inf(f1, f2) <= tol * sys.scale(t, s)) break;
            }
        }
        iterations = it + 1;
    }
    if (!converged && norm_inf(f1, f2) > tol * sys.scale(t, s))
        throw SolveError("nodal projection: did not reach tolerance");

    return NodalRoot{t, s, r, R, iterations, norm_inf(f1, f2) / sys.scale(t, s)};
}

/// Unique nodal projection: (t, s) with t w+ + s w- in M, plus the
/// coefficient record of the reduced system.
inline NodalProjection project_nodal(const Problem& p, const ScalarField& w,
                                     double tol = 1e-10) {
    auto [wp, wm] = sign_split(w);
    if (std::sqrt(h1v_norm_sq(wp, p.potential_field())) < 1e-10 ||
        std::sqrt(h1v_norm_sq(wm, p.potential_field())) < 1e-10)
        throw SolveError("nodal projection: degenerate sign part (||w+|| or ||w-|| < 1e-10)");
    NodalSystem sys(p, std::move(wp), std::move(wm));
    const NodalRoot root = nodal_root(sys, tol);
    ScalarField field = root.t * sys.wplus();
    axpy(root.s, sys.wminus(), field);
    return NodalProjection{root.t,     root.s,          std::move(field), sys.coeffs(),
                           root.box_lo, root.box_hi,    root.iterations,  root.residual};
}

}  // namespace sbp
