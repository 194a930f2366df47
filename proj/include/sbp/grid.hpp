#pragma once

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "sbp/errors.hpp"

namespace sbp {

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

namespace detail {

/// Real 3D FFT of size n^3, with an internal workspace behind a mutex.
/// forward: unnormalized r2c; inverse: c2r scaled by 1/n^3.
class Fft3 {
public:
    explicit Fft3(int n)
        : n_(n), nc_(static_cast<std::size_t>(n) * n * (n / 2 + 1)) {
        const std::size_t nr = static_cast<std::size_t>(n) * n * n;
        rbuf_ = fftw_alloc_real(nr);
        cbuf_ = fftw_alloc_complex(nc_);
        fwd_ = fftw_plan_dft_r2c_3d(n, n, n, rbuf_, cbuf_, FFTW_ESTIMATE);
        inv_ = fftw_plan_dft_c2r_3d(n, n, n, cbuf_, rbuf_, FFTW_ESTIMATE);
    }
    ~Fft3() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(rbuf_);
        fftw_free(cbuf_);
    }
    Fft3(const Fft3&) = delete;
    Fft3& operator=(const Fft3&) = delete;

    int n() const { return n_; }
    std::size_t complex_size() const { return nc_; }

    void forward(const std::vector<double>& in, std::vector<std::complex<double>>& out) const {
        std::scoped_lock lock(mu_);
        std::copy(in.begin(), in.end(), rbuf_);
        fftw_execute(fwd_);
        out.resize(nc_);
        for (std::size_t i = 0; i < nc_; ++i) out[i] = {cbuf_[i][0], cbuf_[i][1]};
    }

    void inverse(const std::vector<std::complex<double>>& in, std::vector<double>& out) const {
        std::scoped_lock lock(mu_);
        for (std::size_t i = 0; i < nc_; ++i) {
            cbuf_[i][0] = in[i].real();
            cbuf_[i][1] = in[i].imag();
        }
        fftw_execute(inv_);
        const std::size_t nr = static_cast<std::size_t>(n_) * n_ * n_;
        const double scale = 1.0 / static_cast<double>(nr);
        out.resize(nr);
        for (std::size_t i = 0; i < nr; ++i) out[i] = rbuf_[i] * scale;
    }

private:
    int n_;
    std::size_t nc_;
    mutable std::mutex mu_;
    double* rbuf_;
    fftw_complex* cbuf_;
    fftw_plan fwd_;
    fftw_plan inv_;
};

}  // namespace detail

/// Truncated cubic domain [-L, L)^3 with N uniform nodes per axis and
/// the matching spectral wavenumbers k_j = pi*j/L (symmetric integer range).
/// Immutable after construction; shared via GridPtr.
class Grid {
public:
    static GridPtr make(double half_length, int points_per_axis) {
        if (!(half_length > 0.0))
            throw InvalidParameter("grid: half_length must be positive");
        if (points_per_axis % 2 != 0)
            throw InvalidParameter("grid: N must be even");
        if (points_per_axis < 8 || points_per_axis > 256)
            throw InvalidParameter("grid: N must lie in [8, 256]");
        return GridPtr(new Grid(half_length, points_per_axis));
    }

    double half_length() const { return L_; }
    int n() const { return N_; }
    double spacing() const { return h_; }
    double cell_volume() const { return h_ * h_ * h_; }
    std::size_t node_count() const { return static_cast<std::size_t>(N_) * N_ * N_; }

    /// Node coordinate along one axis, index in [0, N).
    double coord(int i) const { return -L_ + h_ * i; }

    const std::vector<double>& wavenumbers() const { return k_; }

    std::size_t index(int i, int j, int l) const {
        return (static_cast<std::size_t>(i) * N_ + j) * N_ + l;
    }

    const detail::Fft3& fft() const { return fft_; }

private:
    Grid(double L, int N)
        : L_(L), N_(N), h_(2.0 * L / N), fft_(N) {
        k_.resize(N);
        for (int i = 0; i < N; ++i) {
            const int j = (i <= N / 2) ? i : i - N;
            k_[i] = std::numbers::pi * j / L_;
        }
    }

    double L_;
    int N_;
    double h_;
    std::vector<double> k_;
    detail::Fft3 fft_;
};

/// Real-valued function sampled on a Grid, row-major axis order.
class ScalarField {
public:
    ScalarField(GridPtr grid, double fill = 0.0)
        : grid_(std::move(grid)), values_(grid_->node_count(), fill) {}
    ScalarField(GridPtr grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_->node_count())
            throw InvalidParameter("field: value count does not match grid");
    }

    const Grid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    /// Fill from a callable f(x, y, z).
    template <class F>
    static ScalarField sample(GridPtr grid, F&& f) {
        ScalarField out(grid);
        const Grid& g = *grid;
        std::size_t idx = 0;
        for (int i = 0; i < g.n(); ++i)
            for (int j = 0; j < g.n(); ++j)
                for (int l = 0; l < g.n(); ++l)
                    out[idx++] = f(g.coord(i), g.coord(j), g.coord(l));
        return out;
    }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

inline void require_same_grid(const ScalarField& a, const ScalarField& b) {
    if (a.grid_ptr().get() != b.grid_ptr().get())
        throw GridMismatch("fields live on different grids");
}

inline void require_finite(const ScalarField& f, const char* where) {
    if (!f.finite()) throw InvalidParameter(std::string(where) + ": field has non-finite values");
}

// --- pointwise arithmetic -------------------------------------------------

inline ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b);
    ScalarField out(a.grid_ptr());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

inline ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b);
    ScalarField out(a.grid_ptr());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline ScalarField operator*(double t, const ScalarField& a) {
    ScalarField out(a.grid_ptr());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = t * a[i];
    return out;
}

inline void axpy(double t, const ScalarField& x, ScalarField& y) {
    require_same_grid(x, y);
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += t * x[i];
}

// --- quadrature and norms -------------------------------------------------

/// Rectangle rule: sum f * h^3 (spectrally accurate for smooth periodic f).
inline double integrate(const ScalarField& f) {
    require_finite(f, "integrate");
    long double s = 0.0L;
    for (double v : f.values()) s += v;
    return static_cast<double>(s) * f.grid().cell_volume();
}

inline double inner(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b);
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
    return static_cast<double>(s) * a.grid().cell_volume();
}

/// L^p norm; p = infinity gives max |f|.
inline double lp_norm(const ScalarField& f, double p) {
    require_finite(f, "lp_norm");
    if (p == std::numeric_limits<double>::infinity()) {
        double m = 0.0;
        for (double v : f.values()) m = std::max(m, std::abs(v));
        return m;
    }
    if (!(p >= 1.0)) throw InvalidParameter("lp_norm: exponent must be >= 1");
    long double s = 0.0L;
    for (double v : f.values()) s += std::pow(std::abs(v), static_cast<long double>(p));
    return std::pow(static_cast<double>(s) * f.grid().cell_volume(), 1.0 / p);
}

// --- spectral operators ---------------------------------------------------

/// Applies -Laplacian: inverse transform of |k|^2 * u_hat.
inline ScalarField spectral_laplacian(const ScalarField& u) {
    require_finite(u, "spectral_laplacian");
    const Grid& g = u.grid();
    const int N = g.n();
    const auto& k = g.wavenumbers();
    std::vector<std::complex<double>> uh;
    g.fft().forward(u.values(), uh);
    const int nz = N / 2 + 1;
    std::size_t idx = 0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int l = 0; l < nz; ++l) {
                const double k2 = k[i] * k[i] + k[j] * k[j] + k[l] * k[l];
                uh[idx++] *= k2;
            }
    ScalarField out(u.grid_ptr());
    g.fft().inverse(uh, out.values());
    return out;
}

/// Spectral partial derivative along one axis (0, 1, 2).
/// The Nyquist mode is zeroed so the derivative of a real field stays real.
inline ScalarField spectral_derivative(const ScalarField& u, int axis) {
    require_finite(u, "spectral_derivative");
    if (axis < 0 || axis > 2) throw InvalidParameter("spectral_derivative: axis in {0,1,2}");
    const Grid& g = u.grid();
    const int N = g.n();
    const auto& k = g.wavenumbers();
    std::vector<std::complex<double>> uh;
    g.fft().forward(u.values(), uh);
    const int nz = N / 2 + 1;
    std::size_t idx = 0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int l = 0; l < nz; ++l) {
                const std::array<int, 3> m{i, j, l};
                double kk = k[m[axis]];
                if (m[axis] == N / 2) kk = 0.0;
                uh[idx] *= std::complex<double>(0.0, kk);
                ++idx;
            }
    ScalarField out(u.grid_ptr());
    g.fft().inverse(uh, out.values());
    return out;
}

/// Apply a multiplier m(|k|^2) in spectral space (used by the preconditioner).
template <class F>
ScalarField spectral_filter(const ScalarField& u, F&& multiplier) {
    const Grid& g = u.grid();
    const int N = g.n();
    const auto& k = g.wavenumbers();
    std::vector<std::complex<double>> uh;
    g.fft().forward(u.values(), uh);
    const int nz = N / 2 + 1;
    std::size_t idx = 0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int l = 0; l < nz; ++l) {
                const double k2 = k[i] * k[i] + k[j] * k[j] + k[l] * k[l];
                uh[idx++] *= multiplier(k2);
            }
    ScalarField out(u.grid_ptr());
    g.fft().inverse(uh, out.values());
    return out;
}

// --- finite-difference Dirichlet form -------------------------------------
//
// The variational kinetic term uses the second-order seven-point stencil, not
// the spectral symbol: its quadratic form satisfies the discrete Kato
// inequality ||grad_h |u| || <= ||grad_h u||, so energy minimizers keep a
// fixed sign instead of developing the Gibbs undershoot of a truncated
// Fourier interpolant. The FFT stays in use for the convolution kernel and
// the preconditioner, where positivity structure does not matter.

/// Applies -Laplacian by the periodic seven-point stencil.
inline ScalarField fd_neg_laplacian(const ScalarField& u) {
    require_finite(u, "fd_neg_laplacian");
    const Grid& g = u.grid();
    const int N = g.n();
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    ScalarField out(u.grid_ptr());
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int l = 0; l < N; ++l) {
                const double nbr = u[g.index((i + 1) % N, j, l)] +
                                   u[g.index((i + N - 1) % N, j, l)] +
                                   u[g.index(i, (j + 1) % N, l)] +
                                   u[g.index(i, (j + N - 1) % N, l)] +
                                   u[g.index(i, j, (l + 1) % N)] +
                                   u[g.index(i, j, (l + N - 1) % N)];
                out[g.index(i, j, l)] = (6.0 * u[g.index(i, j, l)] - nbr) * inv_h2;
            }
    return out;
}

/// H^1_V squared norm: int |grad u|^2 + int V u^2, with the gradient term as
/// the forward-difference Dirichlet form of the seven-point stencil.
inline double h1v_norm_sq(const ScalarField& u, const ScalarField& V) {
    require_same_grid(u, V);
    for (double v : V.values())
        if (v < 0.0) throw InvalidParameter("h1v_norm_sq: potential must be nonnegative");
    const Grid& g = u.grid();
    const int N = g.n();
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    long double s = 0.0L;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int l = 0; l < N; ++l) {
                const double uc = u[g.index(i, j, l)];
                const double dx = u[g.index((i + 1) % N, j, l)] - uc;
                const double dy = u[g.index(i, (j + 1) % N, l)] - uc;
                const double dz = u[g.index(i, j, (l + 1) % N)] - uc;
                s += (dx * dx + dy * dy + dz * dz) * inv_h2 + V[g.index(i, j, l)] * uc * uc;
            }
    return static_cast<double>(s) * g.cell_volume();
}

}  // namespace sbp
