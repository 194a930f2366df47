#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "sbp/bp_field.hpp"
#include "sbp/nehari.hpp"
#include "sbp/random_field.hpp"

using namespace sbp;

TEST_CASE("kernel_K") {
    CHECK(kernel_K(0.0, 2.0) == Catch::Approx(0.5).epsilon(1e-15));
    CHECK(kernel_K(1.0, 1.0) == Catch::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    CHECK_THROWS_AS(kernel_K(1.0, 0.0), InvalidParameter);
    CHECK_THROWS_AS(kernel_K(-1.0, 1.0), InvalidParameter);

    // K < 1/r everywhere and K -> 1/r as a -> 0
    for (double r : {0.1, 0.5, 1.0, 3.0, 10.0}) {
        CHECK(kernel_K(r, 1.0) < 1.0 / r);
        CHECK(kernel_K(r, 1e-6) == Catch::Approx(1.0 / r).epsilon(1e-9));
    }
    // series branch continuity
    CHECK(kernel_K(0.9e-8, 1.0) == Catch::Approx(kernel_K(1.1e-8, 1.0)).epsilon(1e-7));
    // monotone decreasing in r, values in (0, 1/a]
    double prev = kernel_K(0.0, 1.5);
    CHECK(prev == Catch::Approx(1.0 / 1.5));
    for (double r = 0.05; r < 20.0; r *= 1.4) {
        const double v = kernel_K(r, 1.5);
        CHECK(v > 0.0);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("solve_phi basics") {
    auto g = Grid::make(8.0, 8);
    BPKernel kern(g, 1.0);

    ScalarField zero(g);
    ScalarField pz = kern.solve_phi(zero);
    CHECK(lp_norm(pz, std::numeric_limits<double>::infinity()) == 0.0);

    ScalarField u = random_smooth_field(g, 5);
    ScalarField p1 = kern.solve_phi(u);
    ScalarField p2 = kern.solve_phi(2.0 * u);
    double worst = 0.0;
    const double pmax = lp_norm(p1, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < p1.size(); ++i)
        worst = std::max(worst, std::abs(p2[i] - 4.0 * p1[i]));
    CHECK(worst < 1e-12 * 4.0 * pmax);
}

TEST_CASE("solve_phi matches the direct-sum oracle at N=8") {
    auto g = Grid::make(8.0, 8);
    for (double a : {1.0, 0.5}) {
        BPKernel kern(g, a);
        ScalarField u = random_smooth_field(g, 17);
        ScalarField fast = kern.solve_phi(u);
        ScalarField slow = solve_phi_direct(u, a);
        const double scale = lp_norm(slow, std::numeric_limits<double>::infinity());
        double worst = 0.0;
        for (std::size_t i = 0; i < fast.size(); ++i)
            worst = std::max(worst, std::abs(fast[i] - slow[i]));
        CHECK(worst < 1e-10 * scale);
    }
}

TEST_CASE("solve_phi positivity") {
    auto g = Grid::make(8.0, 16);
    BPKernel kern(g, 1.0);
    for (std::uint64_t seed : {1, 2, 3}) {
        ScalarField phi = kern.solve_phi(random_smooth_field(g, seed));
        const double mx = lp_norm(phi, std::numeric_limits<double>::infinity());
        for (double v : phi.values()) CHECK(v >= -1e-14 * mx);
    }
}

TEST_CASE("coupling") {
    auto g = Grid::make(8.0, 16);
    BPKernel kern(g, 1.0);
    ScalarField zero(g);
    CHECK(coupling(zero, kern.solve_phi(zero)) == 0.0);

    ScalarField u = random_smooth_field(g, 9);
    const double base = coupling(u, kern.solve_phi(u));
    CHECK(base >= 0.0);
    const double l2 = lp_norm(u, 2.0);
    CHECK(base <= (1.0 / 1.0) * l2 * l2 * l2 * l2 * (1.0 + 1e-8));

    for (double t : {0.5, 2.0, 3.0}) {
        ScalarField tu = t * u;
        const double c = coupling(tu, kern.solve_phi(tu));
        CHECK(c == Catch::Approx(t * t * t * t * base).epsilon(1e-12));
    }
}

TEST_CASE("bilinear_coupling") {
    auto g = Grid::make(8.0, 16);
    BPKernel kern(g, 1.0);
    ScalarField u = random_smooth_field(g, 41);
    ScalarField v = random_smooth_field(g, 42);

    CHECK(kern.bilinear_coupling(u, u) ==
          Catch::Approx(coupling(u, kern.solve_phi(u))).epsilon(1e-13));
    CHECK(kern.bilinear_coupling(u, v) ==
          Catch::Approx(kern.bilinear_coupling(v, u)).epsilon(1e-10));

    ScalarField w = random_smooth_field(g, 43);
    auto [wp, wm] = sign_split(w);
    CHECK(kern.bilinear_coupling(wp, wm) >= 0.0);
}

TEST_CASE("disjoint-support additivity") {
    auto g = Grid::make(8.0, 16);
    BPKernel kern(g, 1.0);
    ScalarField w = random_smooth_field(g, 55);
    auto [wp, wm] = sign_split(w);
    ScalarField total = kern.solve_phi(w);
    ScalarField parts = kern.solve_phi(wp) + kern.solve_phi(wm);
    const double scale = lp_norm(total, std::numeric_limits<double>::infinity());
    double worst = 0.0;
    for (std::size_t i = 0; i < total.size(); ++i)
        worst = std::max(worst, std::abs(total[i] - parts[i]));
    CHECK(worst < 1e-12 * scale);
}

TEST_CASE("kernel_energies") {
    CHECK_THROWS_AS(kernel_energies(0.0, 0.01, 100.0), InvalidParameter);
    CHECK_THROWS_AS(kernel_energies(1.0, 1.0, 0.5), InvalidParameter);

    const double r_max = 100.0;
    {
        const KernelEnergies e = kernel_energies(1.0, 0.01, r_max);
        const double exact = 2.0 * std::numbers::pi * (1.0 / 0.01 - 1.0 / r_max);
        CHECK(e.maxwell_truncated == Catch::Approx(exact).epsilon(1e-6));
    }
    // divergence signature: halving eps adds ~ 2 pi / eps
    for (double eps : {0.1, 0.01}) {
        const double m1 = kernel_energies(1.0, eps, r_max).maxwell_truncated;
        const double m2 = kernel_energies(1.0, eps / 2.0, r_max).maxwell_truncated;
        CHECK(m2 - m1 == Catch::Approx(2.0 * std::numbers::pi / eps).epsilon(1e-6));
    }
    // BP energy is Cauchy in eps -> 0 (finite limit)
    double prev_gap = std::numeric_limits<double>::infinity();
    for (double eps = 1e-1; eps > 1e-4; eps /= 2.0) {
        const double b1 = kernel_energies(1.0, eps, r_max).bp_truncated;
        const double b2 = kernel_energies(1.0, eps / 2.0, r_max).bp_truncated;
        const double gap = std::abs(b2 - b1);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
}
