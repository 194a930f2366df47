#pragma once

#include <cmath>
#include <memory>

#include "sbp/bp_field.hpp"
#include "sbp/grid.hpp"
#include "sbp/model.hpp"

namespace sbp {

struct ModelParams {
    double a = 1.0;  // Bopp-Podolsky parameter, a > 0
    double q = 1.0;  // coupling; q = 0 degenerates to the local equation
    Nonlinearity f = Nonlinearity::power(5.0);
    Potential V{};
};

/// Grid + model parameters + the precomputed pieces every evaluation needs
/// (sampled potential, padded kernel transform). Immutable.
class Problem {
public:
    Problem(GridPtr grid, ModelParams params)
        : grid_(grid),
          params_(params),
          kernel_(std::make_shared<BPKernel>(grid, params.a)),
          vfield_(ScalarField::sample(grid, params.V)) {
        if (!(params.a > 0.0)) throw InvalidParameter("model: a must be positive");
    }

    const Grid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }
    const ModelParams& params() const { return params_; }
    const BPKernel& kernel() const { return *kernel_; }
    const ScalarField& potential_field() const { return vfield_; }

    ScalarField solve_phi(const ScalarField& u) const { return kernel_->solve_phi(u); }

    double h1v(const ScalarField& u) const { return h1v_norm_sq(u, vfield_); }

    /// int phi_u u^2 (zero without a nonlocal term).
    double nonlocal_coupling(const ScalarField& u) const {
        if (params_.q == 0.0) return 0.0;
        return coupling(u, kernel_->solve_phi(u));
    }

    double F_integral(const ScalarField& u) const {
        long double s = 0.0L;
        for (double v : u.values()) s += F_eval(params_.f, v);
        return static_cast<double>(s) * grid_->cell_volume();
    }

    /// int f(t*u) u  (the fibering-map nonlinear integral).
    double fu_integral(const ScalarField& u, double t = 1.0) const {
        long double s = 0.0L;
        for (double v : u.values()) s += static_cast<long double>(f_eval(params_.f, t * v)) * v;
        return static_cast<double>(s) * grid_->cell_volume();
    }

    /// int f'(t*u) u^2; nodes with u = 0 contribute their limit value 0.
    double fprime_u2_integral(const ScalarField& u, double t = 1.0) const {
        long double s = 0.0L;
        for (double v : u.values()) {
            if (v == 0.0 || t == 0.0) continue;
            s += static_cast<long double>(fprime_eval(params_.f, t * v)) * v * v;
        }
        return static_cast<double>(s) * grid_->cell_volume();
    }

private:
    GridPtr grid_;
    ModelParams params_;
    std::shared_ptr<BPKernel> kernel_;
    ScalarField vfield_;
};

struct EnergyBreakdown {
    double kinetic_potential = 0.0;  // (1/2) ||u||^2
    double nonlocal = 0.0;           // (q^2/4) int phi_u u^2
    double nonlinear = 0.0;          // int F(u)
    double total = 0.0;              // kinetic_potential + nonlocal - nonlinear
};

/// J(u) = (1/2)||u||^2 + (q^2/4) int phi_u u^2 - int F(u).
inline EnergyBreakdown evaluate_J(const Problem& p, const ScalarField& u) {
    require_finite(u, "evaluate_J");
    if (u.grid_ptr().get() != p.grid_ptr().get())
        throw GridMismatch("evaluate_J: field grid differs from problem grid");
    EnergyBreakdown e;
    e.kinetic_potential = 0.5 * p.h1v(u);
    const double q = p.params().q;
    e.nonlocal = 0.25 * q * q * p.nonlocal_coupling(u);
    e.nonlinear = p.F_integral(u);
    e.total = e.kinetic_potential + e.nonlocal - e.nonlinear;
    return e;
}

/// Strong-form gradient field g = -Lap u + V u + q^2 phi_u u - f(u), so that
/// int g v is the directional derivative of J at u along v.
inline ScalarField evaluate_grad(const Problem& p, const ScalarField& u) {
    require_finite(u, "evaluate_grad");
    if (u.grid_ptr().get() != p.grid_ptr().get())
        throw GridMismatch("evaluate_grad: field grid differs from problem grid");
    ScalarField g = fd_neg_laplacian(u);  // -Lap u, same stencil as h1v_norm_sq
    const ScalarField& V = p.potential_field();
    const double q2 = p.params().q * p.params().q;
    if (q2 != 0.0) {
        const ScalarField phi = p.solve_phi(u);
        for (std::size_t i = 0; i < u.size(); ++i)
            g[i] += (V[i] + q2 * phi[i]) * u[i] - f_eval(p.params().f, u[i]);
    } else {
        for (std::size_t i = 0; i < u.size(); ++i)
            g[i] += V[i] * u[i] - f_eval(p.params().f, u[i]);
    }
    return g;
}

/// <J'(u), u> = ||u||^2 + q^2 int phi_u u^2 - int f(u) u.
inline double nehari_residual(const Problem& p, const ScalarField& u) {
    const double q = p.params().q;
    return p.h1v(u) + q * q * p.nonlocal_coupling(u) - p.fu_integral(u);
}

/// Relative stopping metric ||J'(u)||_2 / max(1, ||u||_2).
inline double residual_norm(const Problem& p, const ScalarField& u) {
    const ScalarField g = evaluate_grad(p, u);
    return lp_norm(g, 2.0) / std::max(1.0, lp_norm(u, 2.0));
}

}  // namespace sbp
