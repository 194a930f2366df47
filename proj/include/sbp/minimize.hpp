#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sbp/energy.hpp"
#include "sbp/nehari.hpp"
#include "sbp/random_field.hpp"

namespace sbp {

enum class Initializer { gaussian, dipole, file };

struct SolveOptions {
    int max_iters = 5000;
    double grad_tol = 1e-6;        // relative residual ||J'(u)||_2 / max(1, ||u||_2)
    double step0 = 1.0;            // initial step size
    double shrink = 0.5;           // backtracking shrink factor
    double armijo = 1e-4;          // sufficient-decrease constant
    double projection_tol = 1e-10;
    bool precondition = true;      // spectral (-Lap + v0)^{-1} on the gradient
    std::uint64_t seed = 1;
    Initializer initializer = Initializer::gaussian;
};

struct TraceRow {
    int iter;
    double total;
    double kinetic_potential;
    double nonlocal;
    double nonlinear;
    double residual;
    double t;
    double s;  // NaN for ground-state runs
};

struct SolveReport {
    bool converged = false;
    std::string status;            // "converged", "max-iters", "stall"
    EnergyBreakdown energy;
    double level = 0.0;            // J at the final iterate (c0 / c1 estimate)
    double residual = 0.0;
    int iterations = 0;
    double t = 0.0, s = 0.0;       // last projection parameters
    double min_u = 0.0, max_u = 0.0;
    double norm_plus = 0.0, norm_minus = 0.0;          // ||w+-|| (nodal)
    double comp_residual_plus = 0.0, comp_residual_minus = 0.0;
    double boundary_max = 0.0;     // max |u| on the box boundary shell
    std::vector<TraceRow> trace;
    std::optional<ScalarField> field;
    std::optional<NodalCoefficients> coeffs;
    FiberingDiagnostics fiber_diag;
};

namespace detail {

inline double boundary_max_abs(const ScalarField& u) {
    const Grid& g = u.grid();
    double m = 0.0;
    const int N = g.n();
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            m = std::max(m, std::abs(u[g.index(0, i, j)]));
            m = std::max(m, std::abs(u[g.index(i, 0, j)]));
            m = std::max(m, std::abs(u[g.index(i, j, 0)]));
        }
    return m;
}

inline ScalarField precondition(const Problem& p, const ScalarField& g, bool enabled) {
    if (!enabled) return g;
    const double v0 = p.params().V.v0;
    return spectral_filter(g, [v0](double k2) { return 1.0 / (k2 + v0); });
}

}  // namespace detail

/// Initial field for a solve; the seed adds a deterministic band-limited
/// perturbation so independent restarts explore different directions.
inline ScalarField make_initial_field(GridPtr grid, const SolveOptions& opts,
                                      double sigma = 0.0) {
    if (opts.initializer == Initializer::file)
        throw InvalidParameter("make_initial_field: the file initializer requires an "
                               "explicitly loaded field");
    ScalarField base = (opts.initializer == Initializer::dipole) ? dipole_field(grid, 1.0, sigma)
                                                                 : gaussian_field(grid, 1.0, sigma);
    ScalarField noise = random_smooth_field(grid, opts.seed);
    axpy(0.05, noise, base);
    return base;
}

namespace detail {

/// Picks the bump width whose Nehari (or nodal-set) projection has the lowest
/// energy. The projected level is exponentially sensitive to the width when
/// the nonlinearity is only marginally super-quartic: a bump much wider than
/// the kernel screening length projects at an astronomically large amplitude,
/// and descent from there stalls. Scanning a short dial of widths keeps the
/// start on the right branch for every admissible nonlinearity.
inline ScalarField select_initial(const Problem& p, const SolveOptions& opts, bool nodal) {
    const double L = p.grid().half_length();
    std::optional<ScalarField> best;
    double best_level = std::numeric_limits<double>::infinity();
    for (double sigma : {L / 6.0, L / 9.0, L / 12.0, L / 16.0}) {
        ScalarField cand = make_initial_field(p.grid_ptr(), opts, sigma);
        try {
            double level;
            if (nodal) {
                const NodalProjection pr = project_nodal(p, cand, opts.projection_tol);
                level = evaluate_J(p, pr.field).total;
            } else {
                FiberCache cache(p, cand);
                FiberingDiagnostics diag;
                level = cache.h(fiber_root(cache, opts.projection_tol, diag));
            }
            if (level < best_level) {
                best_level = level;
                best = std::move(cand);
            }
        } catch (const SolveError&) {
            // this width has no usable projection; try the next one
        }
    }
    if (!best) return make_initial_field(p.grid_ptr(), opts);
    return std::move(*best);
}

}  // namespace detail

/// Projected gradient descent for the ground level c0 = inf_N J.
inline SolveReport solve_ground(const Problem& p, const SolveOptions& opts,
                                std::optional<ScalarField> init = std::nullopt) {
    ScalarField u = init ? std::move(*init) : detail::select_initial(p, opts, false);
    if (lp_norm(u, 2.0) < 1e-12) throw SolveError("solve_ground: degenerate initializer");

    // ground iterates are kept nonnegative: the discrete Kato inequality of
    // the difference stencil gives J(|u|) <= J(u), so rectification is a
    // descent move and the limit keeps the fixed sign of the ground state
    auto rectify = [](ScalarField& v) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(v[i]);
    };
    rectify(u);

    SolveReport rep;
    {
        GroundProjection pr = project_ground(p, u, opts.projection_tol);
        u = std::move(pr.field);
        rep.t = pr.t;
        rep.fiber_diag = pr.diag;
    }
    EnergyBreakdown e = evaluate_J(p, u);
    double eta = opts.step0;

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        const ScalarField g = evaluate_grad(p, u);
        const double res = lp_norm(g, 2.0) / std::max(1.0, lp_norm(u, 2.0));
        rep.trace.push_back({iter, e.total, e.kinetic_potential, e.nonlocal, e.nonlinear, res,
                             rep.t, std::nan("")});
        rep.iterations = iter;
        if (res <= opts.grad_tol) {
            rep.converged = true;
            rep.status = "converged";
            break;
        }

        const ScalarField d = detail::precondition(p, g, opts.precondition);
        const double gd = inner(g, d);
        bool accepted = false;
        for (int k = 0; k < 40; ++k) {
            ScalarField trial = u;
            axpy(-eta, d, trial);
            rectify(trial);
            try {
                FiberCache cache(p, trial);
                FiberingDiagnostics diag;
                const double t = fiber_root(cache, opts.projection_tol, diag);
                const double J_new = cache.h(t);
                if (J_new <= e.total - opts.armijo * eta * gd) {
                    u = t * trial;
                    rep.t = t;
                    rep.fiber_diag = diag;
                    e = evaluate_J(p, u);
                    accepted = true;
                    eta = std::min(eta * 2.0, 1e6);
                    break;
                }
            } catch (const SolveError&) {
                // step destroyed the field; shrink and retry
            }
            eta *= opts.shrink;
        }
        if (!accepted) {
            rep.status = "stall";
            break;
        }
    }
    if (rep.status.empty()) rep.status = "max-iters";

    rep.energy = e;
    rep.level = e.total;
    rep.residual = residual_norm(p, u);
    rep.min_u = *std::min_element(u.values().begin(), u.values().end());
    rep.max_u = *std::max_element(u.values().begin(), u.values().end());
    rep.boundary_max = detail::boundary_max_abs(u);
    rep.field = std::move(u);
    return rep;
}

/// Projected gradient descent over the nodal set for c1 = inf_M J.
inline SolveReport solve_nodal(const Problem& p, const SolveOptions& opts,
                               std::optional<ScalarField> init = std::nullopt) {
    ScalarField w = init ? std::move(*init) : detail::select_initial(p, opts, true);

    auto check_signs = [&](const ScalarField& v) {
        auto [vp, vm] = sign_split(v);
        const double np = std::sqrt(h1v_norm_sq(vp, p.potential_field()));
        const double nm = std::sqrt(h1v_norm_sq(vm, p.potential_field()));
        if (np < 1e-10 || nm < 1e-10)
            throw SolveError("solve_nodal: sign collapse -- a component vanished; "
                             "restart with a wider dipole initializer");
        return std::pair{np, nm};
    };
    {
        // an almost single-signed start only carries noise in one component;
        // projecting would inflate that noise into a spurious nodal branch
        auto [np, nm] = check_signs(w);
        if (std::min(np, nm) < 0.05 * std::max(np, nm))
            throw SolveError("solve_nodal: initializer is almost single-signed; "
                             "use a dipole initializer with two genuine bumps");
    }

    SolveReport rep;
    EnergyBreakdown e;
    {
        auto [wp, wm] = sign_split(w);
        NodalSystem sys(p, std::move(wp), std::move(wm));
        const NodalRoot root = nodal_root(sys, opts.projection_tol);
        ScalarField v = root.t * sys.wplus();
        axpy(root.s, sys.wminus(), v);
        w = std::move(v);
        rep.t = root.t;
        rep.s = root.s;
        rep.coeffs = sys.coeffs();
        e = sys.energy(root.t, root.s);
    }
    double eta = opts.step0;

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        const ScalarField g = evaluate_grad(p, w);
        const double res = lp_norm(g, 2.0) / std::max(1.0, lp_norm(w, 2.0));
        rep.trace.push_back({iter, e.total, e.kinetic_potential, e.nonlocal, e.nonlinear, res,
                             rep.t, rep.s});
        rep.iterations = iter;
        if (res <= opts.grad_tol) {
            rep.converged = true;
            rep.status = "converged";
            break;
        }

        const ScalarField d = detail::precondition(p, g, opts.precondition);
        const double gd = inner(g, d);
        bool accepted = false;
        for (int k = 0; k < 40; ++k) {
            ScalarField trial = w;
            axpy(-eta, d, trial);
            try {
                auto [tp, tm] = sign_split(trial);
                NodalSystem sys(p, std::move(tp), std::move(tm));
                const NodalRoot root = nodal_root(sys, opts.projection_tol);
                const EnergyBreakdown e_new = sys.energy(root.t, root.s);
                if (e_new.total <= e.total - opts.armijo * eta * gd) {
                    ScalarField v = root.t * sys.wplus();
                    axpy(root.s, sys.wminus(), v);
                    w = std::move(v);
                    rep.t = root.t;
                    rep.s = root.s;
                    rep.coeffs = sys.coeffs();
                    e = e_new;
                    accepted = true;
                    eta = std::min(eta * 2.0, 1e6);
                    break;
                }
            } catch (const SolveError&) {
            }
            eta *= opts.shrink;
        }
        if (!accepted) {
            rep.status = "stall";
            break;
        }
    }
    if (rep.status.empty()) rep.status = "max-iters";

    auto [np, nm] = check_signs(w);
    rep.norm_plus = np;
    rep.norm_minus = nm;
    {
        auto [wp, wm] = sign_split(w);
        const ScalarField g = evaluate_grad(p, w);
        const double scale_p = np * np + std::abs(p.fu_integral(wp));
        const double scale_m = nm * nm + std::abs(p.fu_integral(wm));
        rep.comp_residual_plus = inner(g, wp) / scale_p;
        rep.comp_residual_minus = inner(g, wm) / scale_m;
    }
    rep.energy = e;
    rep.level = e.total;
    rep.residual = residual_norm(p, w);
    rep.min_u = *std::min_element(w.values().begin(), w.values().end());
    rep.max_u = *std::max_element(w.values().begin(), w.values().end());
    rep.boundary_max = detail::boundary_max_abs(w);
    rep.field = std::move(w);
    return rep;
}

}  // namespace sbp
