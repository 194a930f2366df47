#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <vector>

#include "sbp/errors.hpp"
#include "sbp/grid.hpp"

namespace sbp {

/// Fundamental solution of -Lap + a^2 Lap^2 (times 4*pi*delta):
/// K(r) = (1 - exp(-r/a)) / r, with the removable-singularity value 1/a at r=0.
inline double kernel_K(double r, double a) {
    if (!(a > 0.0)) throw InvalidParameter("kernel_K: a must be positive");
    if (r < 0.0) throw InvalidParameter("kernel_K: r must be nonnegative");
    const double x = r / a;
    if (x < 1e-8) {
        // series of (1-e^{-x})/x / a, avoids cancellation near the origin
        return (1.0 - x / 2.0 + x * x / 6.0) / a;
    }
    return (1.0 - std::exp(-x)) / r;
}

/// Coulomb kernel G(r) = 1/r, truncated below epsilon.
struct CoulombKernel {
    double epsilon;
    explicit CoulombKernel(double eps) : epsilon(eps) {
        if (!(eps > 0.0)) throw InvalidParameter("CoulombKernel: epsilon must be positive");
    }
    double operator()(double r) const { return 1.0 / std::max(r, epsilon); }
};

/// Sampled Bopp-Podolsky kernel on the doubled (zero-padded) grid together
/// with its transform; supports free-space convolution phi_u = K * u^2.
class BPKernel {
public:
    BPKernel(GridPtr grid, double a)
        : grid_(std::move(grid)), a_(a), fft_(std::make_unique<detail::Fft3>(2 * grid_->n())) {
        if (!(a > 0.0)) throw InvalidParameter("BPKernel: a must be positive");
        const int M = 2 * grid_->n();
        const double h = grid_->spacing();
        std::vector<double> kern(static_cast<std::size_t>(M) * M * M);
        std::vector<double> d(M);
        for (int i = 0; i < M; ++i) d[i] = ((i <= M / 2) ? i : i - M) * h;
        std::size_t idx = 0;
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j)
                for (int l = 0; l < M; ++l) {
                    const double r = std::sqrt(d[i] * d[i] + d[j] * d[j] + d[l] * d[l]);
                    kern[idx++] = kernel_K(r, a_);
                }
        fft_->forward(kern, kern_hat_);
    }

    double a() const { return a_; }
    const Grid& grid() const { return *grid_; }

    /// phi(x) = sum_y K(|x-y|) u(y)^2 h^3, exact free-space sum via the
    /// doubled grid (no periodic images for points of the original box).
    ScalarField solve_phi(const ScalarField& u) const {
        require_finite(u, "solve_phi");
        if (u.grid_ptr().get() != grid_.get())
            throw GridMismatch("solve_phi: field grid differs from kernel grid");
        const int N = grid_->n();
        const int M = 2 * N;
        std::vector<double> padded(static_cast<std::size_t>(M) * M * M, 0.0);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                for (int l = 0; l < N; ++l)
                    padded[(static_cast<std::size_t>(i) * M + j) * M + l] =
                        u[grid_->index(i, j, l)] * u[grid_->index(i, j, l)];
        std::vector<std::complex<double>> ph;
        fft_->forward(padded, ph);
        const double h3 = grid_->cell_volume();
        for (std::size_t i = 0; i < ph.size(); ++i) ph[i] *= kern_hat_[i] * h3;
        fft_->inverse(ph, padded);
        ScalarField phi(u.grid_ptr());
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                for (int l = 0; l < N; ++l)
                    phi[grid_->index(i, j, l)] =
                        padded[(static_cast<std::size_t>(i) * M + j) * M + l];
        return phi;
    }

    /// B(u, v) = int (K * u^2) v^2; symmetric in (u, v).
    double bilinear_coupling(const ScalarField& u, const ScalarField& v) const {
        require_same_grid(u, v);
        const ScalarField phi = solve_phi(u);
        long double s = 0.0L;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += static_cast<long double>(phi[i]) * v[i] * v[i];
        return static_cast<double>(s) * grid_->cell_volume();
    }

private:
    GridPtr grid_;
    double a_;
    std::unique_ptr<detail::Fft3> fft_;
    std::vector<std::complex<double>> kern_hat_;
};

/// int phi u^2 for phi = solve_phi(u); nonnegative, bounded by (1/a)||u||_2^4.
inline double coupling(const ScalarField& u, const ScalarField& phi) {
    require_same_grid(u, phi);
    long double s = 0.0L;
    for (std::size_t i = 0; i < u.size(); ++i)
        s += static_cast<long double>(phi[i]) * u[i] * u[i];
    return static_cast<double>(s) * u.grid().cell_volume();
}

/// Brute-force O(N^6) reference for solve_phi; feasible only for small N.
inline ScalarField solve_phi_direct(const ScalarField& u, double a) {
    const Grid& g = u.grid();
    const int N = g.n();
    ScalarField phi(u.grid_ptr());
    const double h3 = g.cell_volume();
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int l = 0; l < N; ++l) {
                long double s = 0.0L;
                for (int i2 = 0; i2 < N; ++i2)
                    for (int j2 = 0; j2 < N; ++j2)
                        for (int l2 = 0; l2 < N; ++l2) {
                            const double dx = g.coord(i) - g.coord(i2);
                            const double dy = g.coord(j) - g.coord(j2);
                            const double dz = g.coord(l) - g.coord(l2);
                            const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
                            const double uu = u[g.index(i2, j2, l2)];
                            s += kernel_K(r, a) * uu * uu;
                        }
                phi[g.index(i, j, l)] = static_cast<double>(s) * h3;
            }
    return phi;
}

namespace detail {

template <class F>
double adaptive_simpson_rec(F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(F f, double a, double b, double rel_tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double tol = std::max(std::abs(whole) * rel_tol, 1e-14 * rel_tol);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace detail

struct KernelEnergies {
    double maxwell_truncated;  // (1/2) int_{eps<r<rmax} |grad G|^2, diverges as eps -> 0
    double bp_truncated;       // (1/2) int |grad K|^2 + (a^2/2) int |Lap K|^2, finite limit
};

/// Radial quadrature of both truncated electrostatic self-energies over
/// r in (eps, r_max). Integration runs in log-radius for accuracy across
/// many decades of r.
inline KernelEnergies kernel_energies(double a, double eps, double r_max) {
    if (!(a > 0.0)) throw InvalidParameter("kernel_energies: a must be positive");
    if (!(eps > 0.0 && eps < r_max)) throw InvalidParameter("kernel_energies: need 0 < eps < r_max");

    // G = 1/r: (1/2)|G'|^2 * 4 pi r^2 = 2 pi / r^2
    auto maxwell_ig = [](double s) {
        const double r = std::exp(s);
        return 2.0 * std::numbers::pi / (r * r) * r;  // * dr/ds
    };
    // K' = [ (r/a) e^{-r/a} - (1 - e^{-r/a}) ] / r^2;  Lap K = -e^{-r/a} / (a^2 r)
    auto bp_ig = [a](double s) {
        const double r = std::exp(s);
        const double e = std::exp(-r / a);
        const double kp = ((r / a) * e - (1.0 - e)) / (r * r);
        const double lap = -e / (a * a * r);
        const double dens = 2.0 * std::numbers::pi * r * r * (kp * kp + a * a * lap * lap);
        return dens * r;
    };
    const double s0 = std::log(eps), s1 = std::log(r_max);
    KernelEnergies out;
    out.maxwell_truncated = detail::adaptive_simpson(maxwell_ig, s0, s1, 1e-10);
    out.bp_truncated = detail::adaptive_simpson(bp_ig, s0, s1, 1e-12);
    return out;
}

}  // namespace sbp
