#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "sbp/grid.hpp"

namespace sbp {

/// Deterministic smooth random field: seeded white noise, band-limited to
/// |k| <= N pi / (2L), multiplied by a Gaussian envelope so the values decay
/// before the boundary, and normalized to ||.||_2 = 1.
inline ScalarField random_smooth_field(GridPtr grid, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    ScalarField noise(grid);
    for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = normal(rng);

    const double L = grid->half_length();
    const double k_cut = grid->n() * std::numbers::pi / (2.0 * L);
    ScalarField smooth = spectral_filter(noise, [k_cut](double k2) {
        return (k2 <= k_cut * k_cut) ? 1.0 : 0.0;
    });

    const double sigma = L / 3.0;
    const Grid& g = *grid;
    std::size_t idx = 0;
    for (int i = 0; i < g.n(); ++i)
        for (int j = 0; j < g.n(); ++j)
            for (int l = 0; l < g.n(); ++l) {
                const double x = g.coord(i), y = g.coord(j), z = g.coord(l);
                smooth[idx++] *= std::exp(-(x * x + y * y + z * z) / (2.0 * sigma * sigma));
            }
    const double n2 = lp_norm(smooth, 2.0);
    if (n2 > 0.0)
        for (std::size_t i = 0; i < smooth.size(); ++i) smooth[i] /= n2;
    return smooth;
}

/// Confined single-sign bump: exp(-|x|^2 / (2 sigma^2)), sigma = L/6.
inline ScalarField gaussian_field(GridPtr grid, double amplitude = 1.0, double sigma = 0.0) {
    if (sigma <= 0.0) sigma = grid->half_length() / 6.0;
    return ScalarField::sample(grid, [sigma, amplitude](double x, double y, double z) {
        return amplitude * std::exp(-(x * x + y * y + z * z) / (2.0 * sigma * sigma));
    });
}

/// Sign-changing dipole: difference of Gaussians centered at +-L/4 on axis 1,
/// periodized along that axis so the field is antisymmetric on the periodic
/// grid to round-off (a bare Gaussian leaves its tail on the wrap plane
/// x = -L, which is its own reflection point).
inline ScalarField dipole_field(GridPtr grid, double amplitude = 1.0, double sigma = 0.0) {
    const double L = grid->half_length();
    if (sigma <= 0.0) sigma = L / 6.0;
    const double c = L / 4.0;
    return ScalarField::sample(grid, [=](double x, double y, double z) {
        const double r2 = y * y + z * z;
        double vp = 0.0, vm = 0.0;
        for (int m = -1; m <= 1; ++m) {
            const double xs = x + 2.0 * L * m;
            vp += std::exp(-((xs - c) * (xs - c) + r2) / (2.0 * sigma * sigma));
            vm += std::exp(-((xs + c) * (xs + c) + r2) / (2.0 * sigma * sigma));
        }
        return amplitude * (vp - vm);
    });
}

}  // namespace sbp
