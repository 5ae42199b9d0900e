#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "esqpt/models.hpp"
#include "esqpt/spectral.hpp"

using namespace esqpt;

namespace {

SpectrumBundle lipkin_bundle(int N, double lambda, double chi = 0.0) {
    Lipkin spec{.N = N, .lambda = lambda, .chi = chi};
    return solve(build_lipkin(spec), spec, lambda);
}

}  // namespace

TEST_CASE("kernels are normalized and peak correctly") {
    for (auto k : {SmoothingKernel::gaussian(0.7), SmoothingKernel::cauchy(0.7)}) {
        // Trapezoidal normalization over a wide window.
        double s = 0.0, h = 0.002;
        for (double x = -3000.0; x <= 3000.0; x += h) s += k(x) * h;
        double expect = k.kind == SmoothingKernel::Kind::gaussian ? 1.0 : 0.99985;
        CHECK(s == doctest::Approx(expect).epsilon(1e-3));
    }
    auto g = SmoothingKernel::gaussian(0.5);
    CHECK(g(0.0) == doctest::Approx(1.0 / (0.5 * std::sqrt(2 * std::numbers::pi))));
    CHECK_THROWS_AS((void)SmoothingKernel::gaussian(0.0), std::invalid_argument);
}

TEST_CASE("single-level density peaks at the kernel maximum") {
    auto kernel = SmoothingKernel::gaussian(0.3);
    EnergyGrid grid{-3.0, 5.0, 2001};
    auto rho = weighted_density({1.0}, {}, kernel, grid);
    int best = static_cast<int>(std::max_element(rho.values.begin(), rho.values.end()) -
                                rho.values.begin());
    CHECK(grid.at(best) == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(rho.values[best] ==
          doctest::Approx(1.0 / (0.3 * std::sqrt(2 * std::numbers::pi))).epsilon(1e-4));
}

TEST_CASE("level-density integral counts the levels") {
    auto bundle = lipkin_bundle(60, 0.8);
    auto kernel = default_kernel(bundle.eigenvalues());
    // Widen the window so the clipped gaussian tails are negligible.
    EnergyGrid grid = auto_grid(bundle.eigenvalues(), kernel, 8);
    grid.e_min -= 5.0 * kernel.width;
    grid.e_max += 5.0 * kernel.width;
    grid.n_points += static_cast<int>(10.0 * kernel.width / (kernel.width / 8.0));
    auto rho = smoothed_level_density(bundle, kernel, grid);
    CHECK(rho.integral() == doctest::Approx(61.0).epsilon(1e-8));
}

TEST_CASE("grid coarser than a quarter kernel width is rejected") {
    auto kernel = SmoothingKernel::gaussian(0.1);
    CHECK_THROWS_AS((void)weighted_density({0.0}, {}, kernel, EnergyGrid{-1.0, 1.0, 11}),
                    std::invalid_argument);
}

TEST_CASE("density maximum sits at the separatrix energy") {
    auto bundle = lipkin_bundle(200, 2.0);
    auto kernel = default_kernel(bundle.eigenvalues());
    auto grid = auto_grid(bundle.eigenvalues(), kernel);
    auto rho = smoothed_level_density(bundle, kernel, grid);
    int best = static_cast<int>(std::max_element(rho.values.begin(), rho.values.end()) -
                                rho.values.begin());
    // Classical saddle at the lower pole of the collective sphere: E = -j.
    CHECK(std::fabs(grid.at(best) - (-100.0)) <= kernel.width);
}

TEST_CASE("level slopes: flat family, finite differences, and trace sum rule") {
    auto bundle = lipkin_bundle(50, 0.6);
    SymMatrix zero(bundle.dim(), 0);
    for (double s : level_slopes(bundle, zero)) CHECK(s == 0.0);

    SymMatrix dh = lipkin_dH_dlambda({.N = 50, .lambda = 0.6});
    auto slopes = level_slopes(bundle, dh);

    const double h = 1e-5;
    auto lo = lipkin_bundle(50, 0.6 - h), hi = lipkin_bundle(50, 0.6 + h);
    double min_gap = 1e300;
    for (int i = 0; i + 1 < bundle.dim(); ++i)
        min_gap = std::min(min_gap,
                           bundle.eigenvalues()[i + 1] - bundle.eigenvalues()[i]);
    REQUIRE(min_gap > 1e-3);  // away from avoided crossings at this coupling
    for (int i = 0; i < bundle.dim(); ++i) {
        double fd = (hi.eigenvalues()[i] - lo.eigenvalues()[i]) / (2 * h);
        CHECK(std::fabs(slopes[i] - fd) < 1e-6);
    }

    double sum = 0.0;
    for (double s : slopes) sum += s;
    CHECK(sum == doctest::Approx(dh.trace()).epsilon(1e-10));
}

TEST_CASE("flow of a coupling-independent family vanishes") {
    QuasispinBasis basis = QuasispinBasis::from_two_j(12);
    auto ops = build_quasispin_ops(basis);
    SymMatrix jz_dense(basis.dim, basis.dim - 1);
    for (int k = 0; k < basis.dim; ++k) jz_dense.set(k, k, basis.m_values[k]);
    auto bundle = solve(jz_dense);
    SymMatrix zero(basis.dim, 0);
    auto kernel = default_kernel(bundle.eigenvalues());
    auto grid = auto_grid(bundle.eigenvalues(), kernel);
    auto j = smoothed_flow(bundle, zero, kernel, grid);
    for (double v : j.values) CHECK(v == 0.0);
}

TEST_CASE("continuity residual shrinks under grid refinement") {
    const int N = 100;
    const double lam = 0.6;
    auto center = lipkin_bundle(N, lam);
    auto kernel = default_kernel(center.eigenvalues());
    SymMatrix dh = lipkin_dH_dlambda({.N = N, .lambda = lam});
    std::vector<double> residuals;
    for (int level = 0; level < 3; ++level) {
        double h = 0.02 / (1 << level);
        auto grid = auto_grid(center.eigenvalues(), kernel, 8 << level);
        auto lo = lipkin_bundle(N, lam - h), hi = lipkin_bundle(N, lam + h);
        auto rho_lo = smoothed_level_density(lo, kernel, grid);
        auto rho_hi = smoothed_level_density(hi, kernel, grid);
        auto dj = smoothed_flow(center, dh, kernel, grid).derivative();
        double r = 0.0;
        for (int p = 1; p + 1 < grid.n_points; ++p) {
            double dld = (rho_hi.values[p] - rho_lo.values[p]) / (2 * h);
            r = std::max(r, std::fabs(dld + dj.values[p]));
        }
        residuals.push_back(r);
    }
    CHECK(residuals[1] < residuals[0]);
    CHECK(residuals[2] < residuals[1]);
}

TEST_CASE("flow in the asymmetry parameter equals the generator density") {
    ExtendedDicke spec{.N = 6, .omega = 1.0, .omega0 = 0.9, .lambda = 0.7,
                       .delta = 0.25, .n_max = 24};
    auto bundle = solve(build_dicke(spec), spec, spec.delta);
    SymMatrix hp = dicke_dH_ddelta(spec);
    auto kernel = default_kernel(bundle.eigenvalues());
    auto grid = auto_grid(bundle.eigenvalues(), kernel);
    auto flow = smoothed_flow(bundle, hp, kernel, grid);
    auto obs = observable_density(bundle, hp, kernel, grid);
    for (std::size_t p = 0; p < flow.values.size(); ++p)
        CHECK(flow.values[p] == obs.values[p]);
}

TEST_CASE("flow rate is masked where the density underflows") {
    auto kernel = SmoothingKernel::gaussian(0.2);
    EnergyGrid grid{-40.0, 40.0, 4001};
    auto rho = weighted_density({0.0}, {}, kernel, grid);
    auto j = weighted_density({0.0}, {2.0}, kernel, grid);
    auto phi = flow_rate(j, rho);
    CHECK(std::isnan(phi.front()));
    CHECK(std::isnan(phi.back()));
    CHECK(phi[grid.n_points / 2] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("identity observable gives a flat lattice and the level density") {
    auto bundle = lipkin_bundle(40, 0.5);
    SymMatrix eye(bundle.dim(), 0);
    for (int i = 0; i < bundle.dim(); ++i) eye.set(i, i, 1.0);
    auto lat = peres_lattice(bundle, eye, "identity");
    REQUIRE(static_cast<int>(lat.points.size()) == bundle.dim());
    for (auto& [e, a] : lat.points) CHECK(a == doctest::Approx(1.0).epsilon(1e-12));
    auto kernel = default_kernel(bundle.eigenvalues());
    auto grid = auto_grid(bundle.eigenvalues(), kernel);
    auto obs = observable_density(bundle, eye, kernel, grid);
    auto rho = smoothed_level_density(bundle, kernel, grid);
    for (std::size_t p = 0; p < rho.values.size(); ++p)
        CHECK(obs.values[p] == doctest::Approx(rho.values[p]).epsilon(1e-10));
}

TEST_CASE("energy observable averages back to the energy") {
    auto bundle = lipkin_bundle(80, 0.5);
    SymMatrix h = build_lipkin({.N = 80, .lambda = 0.5});
    auto kernel = default_kernel(bundle.eigenvalues());
    auto grid = auto_grid(bundle.eigenvalues(), kernel);
    auto num = observable_density(bundle, h, kernel, grid);
    auto rho = smoothed_level_density(bundle, kernel, grid);
    for (int p = 0; p < grid.n_points; ++p) {
        double e = grid.at(p);
        if (e < bundle.eigenvalues().front() || e > bundle.eigenvalues().back())
            continue;
        if (rho.values[p] < 0.3) continue;
        CHECK(std::fabs(num.values[p] / rho.values[p] - e) <= 2.0 * kernel.width);
    }
}

TEST_CASE("lattice branches meet at the barrier-top energy") {
    // First-order regime: the descending branch of well states and the
    // ascending branch above the barrier meet in a sharp minimum of <Jz>
    // at E = -j.
    auto bundle = lipkin_bundle(200, 0.8, 4.0);
    auto ops = build_quasispin_ops(QuasispinBasis::from_two_j(200));
    auto lat = peres_lattice(bundle, ops.jz, "Jz");
    double sigma = 5.0 * median_spacing(bundle.eigenvalues());
    int at_min = 0;
    for (std::size_t i = 1; i < lat.points.size(); ++i)
        if (lat.points[i].second < lat.points[at_min].second)
            at_min = static_cast<int>(i);
    CHECK(std::fabs(lat.points[at_min].first - (-100.0)) <= sigma);
    // Strictly monotone on either side of the meeting point.
    for (int i = 0; i + 1 < at_min - 2; ++i)
        CHECK(lat.points[i].second > lat.points[i + 1].second);
    for (std::size_t i = at_min + 2; i + 1 < lat.points.size(); ++i)
        CHECK(lat.points[i].second < lat.points[i + 1].second);
}

TEST_CASE("lattice slope steepens at the separatrix") {
    auto bundle = lipkin_bundle(200, 2.0);
    auto ops = build_quasispin_ops(QuasispinBasis::from_two_j(200));
    auto lat = peres_lattice(bundle, ops.jz, "Jz");
    double sigma = 5.0 * median_spacing(bundle.eigenvalues());
    double best_slope = 0.0, best_e = 0.0;
    for (std::size_t i = 0; i + 11 <= lat.points.size(); ++i) {
        // Least-squares line through 11 consecutive lattice points.
        double se = 0, sa = 0, see = 0, sea = 0;
        for (std::size_t k = i; k < i + 11; ++k) {
            se += lat.points[k].first;
            sa += lat.points[k].second;
            see += lat.points[k].first * lat.points[k].first;
            sea += lat.points[k].first * lat.points[k].second;
        }
        double slope = (11 * sea - se * sa) / (11 * see - se * se);
        if (std::fabs(slope) > std::fabs(best_slope)) {
            best_slope = slope;
            best_e = (lat.points[i].first + lat.points[i + 10].first) / 2.0;
        }
    }
    CHECK(std::fabs(best_e - (-100.0)) <= sigma);
}

TEST_CASE("quantum metric: commuting generator, two-level closed form, overlaps") {
    SymMatrix hd(5, 0), gen(5, 0);
    for (int i = 0; i < 5; ++i) {
        hd.set(i, i, 1.5 * i);
        gen.set(i, i, i * i - 2.0);
    }
    for (double g : geometric_tensor(solve(hd), gen)) CHECK(g == 0.0);

    for (double lam : {-1.5, 0.0, 0.3, 2.0}) {
        SymMatrix h2(2);
        h2.set(0, 0, lam);
        h2.set(1, 1, -lam);
        h2.set(1, 0, 1.0);
        SymMatrix sz(2, 0);
        sz.set(0, 0, 1.0);
        sz.set(1, 1, -1.0);
        auto g = geometric_tensor(solve(h2), sz);
        double expect = 0.25 / ((1 + lam * lam) * (1 + lam * lam));
        CHECK(g[0] == doctest::Approx(expect).epsilon(1e-12));
        CHECK(g[1] == doctest::Approx(expect).epsilon(1e-12));
    }

    // 1 - |<psi_i(l+h)|psi_i(l)>|^2 = g_i h^2 + O(h^3).
    const double h = 1e-4;
    auto a = lipkin_bundle(30, 0.45), b = lipkin_bundle(30, 0.45 + h);
    auto g = geometric_tensor(a, lipkin_dH_dlambda({.N = 30, .lambda = 0.45}));
    for (int i = 0; i < a.dim(); i += 7) {
        double ov = 0.0;
        for (int r = 0; r < a.dim(); ++r) ov += a.vec(i)[r] * b.vec(i)[r];
        double lhs = 1.0 - ov * ov;
        REQUIRE(g[i] * h * h > 1e-18);
        CHECK(lhs / (g[i] * h * h) == doctest::Approx(1.0).epsilon(5e-2));
    }
}

TEST_CASE("convolution: shift, ladder multiplicities, and product spectra") {
    auto kernel = SmoothingKernel::gaussian(0.05);
    double h = kernel.width / 8.0;

    // Delta-like factor shifts the other curve.
    {
        int na = static_cast<int>(1.6 / h) + 1, nb = static_cast<int>(2.0 / h) + 1;
        EnergyGrid ga{1.2, 1.2 + h * (na - 1), na};
        EnergyGrid gb{-1.0, -1.0 + h * (nb - 1), nb};
        auto a = weighted_density({2.0}, {}, kernel, ga);
        auto b = weighted_density({0.3}, {}, kernel, gb);
        auto c = convolve_densities(a, b);
        int best = static_cast<int>(
            std::max_element(c.values.begin(), c.values.end()) - c.values.begin());
        CHECK(c.grid.at(best) == doctest::Approx(2.3).epsilon(1e-2));
    }

    // Two equal uniform ladders: multiplicity staircase 1, 2, 3, ...
    {
        std::vector<double> ladder{0, 1, 2, 3, 4, 5};
        EnergyGrid g{-0.8, 5.8, static_cast<int>(6.6 / h) + 1};
        auto a = weighted_density(ladder, {}, kernel, g);
        auto c = convolve_densities(a, a);
        double peak0 = 0.0, peak1 = 0.0, peak2 = 0.0;
        for (int p = 0; p < c.grid.n_points; ++p) {
            double e = c.grid.at(p);
            if (std::fabs(e - 0.0) < 0.2) peak0 = std::max(peak0, c.values[p]);
            if (std::fabs(e - 1.0) < 0.2) peak1 = std::max(peak1, c.values[p]);
            if (std::fabs(e - 2.0) < 0.2) peak2 = std::max(peak2, c.values[p]);
        }
        CHECK(peak1 / peak0 == doctest::Approx(2.0).epsilon(1e-2));
        CHECK(peak2 / peak0 == doctest::Approx(3.0).epsilon(1e-2));
    }

    // Additive composite spectrum: smoothed density equals the convolution.
    {
        auto h1 = build_lipkin({.N = 5, .lambda = 0.4});
        auto h2 = build_lipkin({.N = 4, .lambda = 0.9, .chi = 1.0});
        auto e1 = solve(h1).eigenvalues();
        auto e2 = solve(h2).eigenvalues();
        std::vector<double> sums;
        for (double x : e1)
            for (double y : e2) sums.push_back(x + y);
        std::sort(sums.begin(), sums.end());

        double sigma = 0.2, hh = sigma / 8.0;
        auto k1 = SmoothingKernel::gaussian(sigma);
        auto span = [&](const std::vector<double>& e) {
            int n = static_cast<int>((e.back() - e.front() + 24.0 * sigma) / hh) + 1;
            return EnergyGrid{e.front() - 12.0 * sigma, 0.0, n};
        };
        EnergyGrid g1 = span(e1), g2 = span(e2);
        g1.e_max = g1.e_min + hh * (g1.n_points - 1);
        g2.e_max = g2.e_min + hh * (g2.n_points - 1);
        auto conv = convolve_densities(weighted_density(e1, {}, k1, g1),
                                       weighted_density(e2, {}, k1, g2));
        auto direct = weighted_density(
            sums, {}, SmoothingKernel::gaussian(sigma * std::numbers::sqrt2), conv.grid);
        for (std::size_t p = 0; p < conv.values.size(); ++p)
            CHECK(std::fabs(conv.values[p] - direct.values[p]) < 1e-8);
    }
}

TEST_CASE("oscillatory residual: zero case, zero mean, and band stripes") {
    auto bundle = lipkin_bundle(80, 1.5);
    auto kernel = default_kernel(bundle.eigenvalues());
    auto grid = auto_grid(bundle.eigenvalues(), kernel);
    auto rho = smoothed_level_density(bundle, kernel, grid);
    auto zero = oscillatory_density(rho, rho);
    for (double v : zero.values) CHECK(v == 0.0);

    auto broad = SmoothingKernel::gaussian(6.0 * kernel.width);
    // Window wide enough that both kernels keep their full mass inside it.
    double pad = 8.0 * broad.width;
    double h = kernel.width / 8.0;
    int n = static_cast<int>((bundle.eigenvalues().back() -
                              bundle.eigenvalues().front() + 2 * pad) / h) + 1;
    EnergyGrid wide{bundle.eigenvalues().front() - pad,
                    bundle.eigenvalues().front() - pad + h * (n - 1), n};
    auto osc = oscillatory_density(smoothed_level_density(bundle, kernel, wide),
                                   smoothed_level_density(bundle, broad, wide));
    CHECK(std::fabs(osc.integral()) < 1e-3 * bundle.dim());

    // Imbalanced atom-field regime: band repetition leaves a sign-alternating
    // residual.
    ExtendedDicke spec{.N = 6, .omega = 1.0, .omega0 = 30.0, .lambda = 0.5,
                       .delta = 0.0, .n_max = 60};
    auto db = solve(build_dicke(spec), spec, spec.lambda);
    auto fine = SmoothingKernel::gaussian(2.0);
    auto coarse = SmoothingKernel::gaussian(40.0);
    auto dgrid = auto_grid(db.eigenvalues(), fine);
    auto r = oscillatory_density(smoothed_level_density(db, fine, dgrid),
                                 smoothed_level_density(db, coarse, dgrid));
    double amp = 0.0;
    for (double v : r.values) amp = std::max(amp, std::fabs(v));
    int flips = 0;
    double prev = 0.0;
    for (double v : r.values) {
        if (std::fabs(v) < 0.05 * amp) continue;
        if (prev != 0.0 && v * prev < 0.0) ++flips;
        prev = v;
    }
    CHECK(flips >= 5);
}

TEST_CASE("bundle solves are bitwise reproducible") {
    auto a = lipkin_bundle(90, 1.1, 0.5);
    auto b = lipkin_bundle(90, 1.1, 0.5);
    CHECK(a.spectrum.values == b.spectrum.values);
    CHECK(a.spectrum.vectors == b.spectrum.vectors);
}
