#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "esqpt/lattice.hpp"
#include "esqpt/models.hpp"
#include "esqpt/semiclassics.hpp"
#include "esqpt/spectral.hpp"
#include "esqpt/thermo.hpp"

using namespace esqpt;

TEST_CASE("one-particle band edge has inverse-square-root exponent") {
    DispersionSpec spec{.eps = 0.0, .tau = 1.0, .n = 1};
    EnergyGrid grid{-2.0475, 2.0475, 820};  // h = 0.005, edges inside bins
    auto dos = dos_from_dispersion(spec, grid, 200000);
    // Log-log fit of DOS against the distance to the lower band edge.
    std::vector<double> lx, ly;
    for (int i = 0; i < grid.n_points; ++i) {
        double d = grid.at(i) - spec.band_min();
        if (d > 0.01 && d < 0.2 && dos.values[i] > 0.0) {
            lx.push_back(std::log(d));
            ly.push_back(std::log(dos.values[i]));
        }
    }
    REQUIRE(lx.size() > 10);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    CHECK(num / den == doctest::Approx(-0.5).epsilon(0.1));
    CHECK(dos.integral() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("two-particle center peak grows logarithmically under refinement") {
    DispersionSpec spec{.eps = 0.3, .tau = 1.0, .n = 2};
    double center = 2 * spec.eps;
    std::vector<double> peak;
    for (double h : {0.08, 0.04, 0.02}) {
        // Odd point count keeps the band center exactly on a bin center.
        int half = static_cast<int>(std::ceil(4.2 / h));
        EnergyGrid grid{center - half * h, center + half * h, 2 * half + 1};
        auto dos = dos_from_dispersion(spec, grid, 3000);
        peak.push_back(dos.values[half]);
        CHECK(dos.integral() == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK(peak[1] > peak[0]);
    CHECK(peak[2] > peak[1]);
    // Equal refinement ratios add equal logarithmic increments.
    CHECK((peak[2] - peak[1]) / (peak[1] - peak[0]) ==
          doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("zero particles collapse to a single bin") {
    DispersionSpec spec{.eps = 0.7, .tau = 0.3, .n = 0};
    EnergyGrid grid{-1.0, 1.0, 21};
    auto dos = dos_from_dispersion(spec, grid, 100);
    for (int i = 0; i < grid.n_points; ++i) {
        if (i == 10)
            CHECK(dos.values[i] == doctest::Approx(1.0 / grid.spacing()));
        else
            CHECK(dos.values[i] == 0.0);
    }
}

TEST_CASE("particle-hole symmetry of the half-filled band") {
    for (int n : {1, 2}) {
        DispersionSpec spec{.eps = 0.0, .tau = 1.0, .n = n};
        EnergyGrid grid{-2.0 * n - 0.1, 2.0 * n + 0.1, 2 * (100 * n) + 1};
        int kp = 2000;
        auto dos = dos_from_dispersion(spec, grid, kp);
        double slack = 4.0 / (std::pow(static_cast<double>(kp), n) * grid.spacing());
        for (int i = 0; i < grid.n_points; ++i)
            CHECK(std::fabs(dos.values[i] - dos.values[grid.n_points - 1 - i]) <=
                  slack);
    }
}

TEST_CASE("Monte-Carlo histogram agrees with the product grid") {
    DispersionSpec spec{.eps = 0.2, .tau = 0.8, .n = 2};
    EnergyGrid grid{-3.0, 3.8, 137};
    auto exact = dos_from_dispersion(spec, grid, 2000);
    auto mc = dos_from_dispersion_mc(spec, grid, 2'000'000, 11);
    auto mc_same = dos_from_dispersion_mc(spec, grid, 2'000'000, 11);
    double l1 = 0.0;
    for (int i = 0; i < grid.n_points; ++i) {
        l1 += std::fabs(exact.values[i] - mc.values[i]) * grid.spacing();
        CHECK(mc.values[i] == mc_same.values[i]);  // bitwise reproducible
    }
    CHECK(l1 < 0.05);
    CHECK(mc.integral() == doctest::Approx(1.0).epsilon(1e-6));

    // Four particles only through the sampling path.
    DispersionSpec four{.eps = 0.0, .tau = 1.0, .n = 4};
    EnergyGrid wide{-8.5, 8.5, 341};
    CHECK_THROWS_AS((void)dos_from_dispersion(four, wide), std::invalid_argument);
    auto dos4 = dos_from_dispersion_mc(four, wide, 1'000'000, 3);
    CHECK(dos4.integral() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("band-edge and band-center shapes follow the formal classification") {
    // One k integral: odd formal dimension, inverse square root at the edges.
    auto lower = classify_formal(1, 0);
    CHECK(lower.shape == SingularityPrediction::Shape::inv_sqrt_right);
    CHECK(lower.derivative_order == 0);
    auto upper = classify_formal(1, 1);
    CHECK(upper.shape == SingularityPrediction::Shape::inv_sqrt_left);
    // Two k integrals: even dimension, upward logarithm at the saddle.
    auto middle = classify_formal(2, 1);
    CHECK(middle.shape == SingularityPrediction::Shape::log_up);
    CHECK(middle.derivative_order == 0);
}

TEST_CASE("single-boson block ignores the interaction") {
    BoseHubbardChain base{.n_sites = 30, .n_bosons = 0, .eps = 0.5, .tau = 0.05,
                          .U = 7.0};
    auto with_u = finite_chain_bands(base, 1);
    base.U = 0.0;
    auto without = finite_chain_bands(base, 1);
    REQUIRE(with_u.size() == 2);
    CHECK(with_u[0].spectrum.dim() == 1);
    CHECK(with_u[0].spectrum.eigenvalues()[0] == doctest::Approx(0.0));
    for (int i = 0; i < 30; ++i)
        CHECK(with_u[1].spectrum.eigenvalues()[i] ==
              doctest::Approx(without[1].spectrum.eigenvalues()[i]).epsilon(1e-12));
    CHECK(with_u[1].sub_bands.size() == 1);
}

TEST_CASE("repulsion detaches a doublon overtone band") {
    BoseHubbardChain base{.n_sites = 30, .n_bosons = 0, .eps = 0.5, .tau = 0.05,
                          .U = 1.0};
    auto blocks = finite_chain_bands(base, 2);
    const ChainBlock& two = blocks[2];
    REQUIRE(two.sub_bands.size() == 2);
    const SubBand& overtone = two.sub_bands.back();
    CHECK(overtone.count() == 30);
    double mean = 0.0;
    for (int i = overtone.first; i <= overtone.last; ++i)
        mean += two.spectrum.eigenvalues()[i] / overtone.count();
    CHECK(mean == doctest::Approx(2 * base.eps + base.U).epsilon(0.05));
    CHECK(overtone.e_min > 2 * base.eps + base.U - 0.1);
}

TEST_CASE("free two-boson block matches the dispersion density") {
    BoseHubbardChain base{.n_sites = 30, .n_bosons = 2, .eps = 0.5, .tau = 0.05,
                          .U = 0.0};
    auto block = solve(build_chain(base), base, 0.0);
    auto kernel = SmoothingKernel::gaussian(0.02);
    EnergyGrid fine{0.6, 1.4, 801};
    auto exact = weighted_density(block.eigenvalues(), {}, kernel, fine);
    for (double& v : exact.values) v /= block.dim();

    DispersionSpec spec{.eps = base.eps, .tau = base.tau, .n = 2};
    auto raw = dos_from_dispersion(spec, fine, 2000);
    auto smooth = smooth_density(raw, kernel);

    double l1 = 0.0;
    for (int i = 0; i < fine.n_points; ++i)
        if (fine.at(i) > 0.7 && fine.at(i) < 1.3)
            l1 += std::fabs(exact.values[i] - smooth.values[i]) * fine.spacing();
    CHECK(l1 < 0.05);
}

TEST_CASE("sub-band detection on synthetic clusters") {
    std::vector<double> levels;
    for (int i = 0; i < 20; ++i) levels.push_back(0.01 * i);
    for (int i = 0; i < 10; ++i) levels.push_back(5.0 + 0.01 * i);
    auto bands = detect_sub_bands(levels);
    REQUIRE(bands.size() == 2);
    CHECK(bands[0].count() == 20);
    CHECK(bands[1].count() == 10);
    CHECK(bands[1].e_min == doctest::Approx(5.0));
    CHECK(detect_sub_bands({1.0}).size() == 1);
    CHECK(detect_sub_bands({}).empty());
}
