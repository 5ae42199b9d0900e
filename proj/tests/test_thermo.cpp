#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "esqpt/models.hpp"
#include "esqpt/semiclassics.hpp"
#include "esqpt/spectral.hpp"
#include "esqpt/thermo.hpp"

using namespace esqpt;

namespace {

SpectrumBundle lipkin_bundle(int N, double lambda) {
    Lipkin spec{.N = N, .lambda = lambda, .chi = 0.0};
    return solve(build_lipkin(spec), spec, lambda);
}

CustomPotential toy_f3() {
    // Three quartic wells with small tilts; 27 nondegenerate stationary points.
    CustomPotential spec;
    spec.f = 3;
    spec.mass = 1.0;
    spec.terms = {
        {-2.0, {2, 0, 0}}, {-2.0, {0, 2, 0}}, {-2.0, {0, 0, 2}},
        {0.2, {1, 0, 0}},  {0.4, {0, 1, 0}},  {0.6, {0, 0, 1}},
        {1.0, {4, 0, 0}},  {1.0, {0, 4, 0}},  {1.0, {0, 0, 4}},
    };
    return spec;
}

// Smoothed Monte-Carlo level density of the toy triple-well system.
DensityCurve toy_density() {
    auto sys = classical_custom(toy_f3());
    MonteCarlo mc;
    mc.n_samples = 10'000'000;
    mc.seed = 5;
    mc.box = {{-2, 2}, {-2, 2}, {-2, 2}, {-3, 3}, {-3, 3}, {-3, 3}};
    EnergyGrid grid{-4.3, 2.0, 1261};
    auto weyl = weyl_density(sys, grid, mc);
    return smooth_density(weyl.rho, SmoothingKernel::gaussian(0.05));
}

}  // namespace

TEST_CASE("two-level source reproduces the Schottky anomaly") {
    double gap = 1.3;
    auto src = discrete_source({0.0, gap});
    for (double t : {0.2, 0.5, 1.0, 3.0}) {
        auto st = canonical(src, t);
        double x = gap / t;
        double want = x * x * std::exp(x) / std::pow(1.0 + std::exp(x), 2);
        CHECK(st.heat_capacity == doctest::Approx(want).epsilon(1e-12));
        CHECK(st.variance >= 0.0);
        CHECK(st.heat_capacity ==
              doctest::Approx(st.variance / (t * t)).epsilon(1e-12));
    }
}

TEST_CASE("infinite-temperature limit is uniform") {
    auto bundle = lipkin_bundle(24, 1.4);
    auto src = discrete_source(bundle.eigenvalues());
    auto p = thermal_weights(src, 1e9);
    double mean = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(p[i] == doctest::Approx(1.0 / 25).epsilon(1e-6));
        mean += p[i] * bundle.eigenvalues()[i];
    }
    double direct = 0.0;
    for (double e : bundle.eigenvalues()) direct += e / 25;
    CHECK(mean == doctest::Approx(direct).epsilon(1e-7));
}

TEST_CASE("heat capacity equals the slope of the caloric curve") {
    auto src = discrete_source(lipkin_bundle(30, 0.9).eigenvalues());
    for (double t : {0.3, 0.8, 2.0, 5.0}) {
        double dt = 1e-4 * t;
        double slope = (canonical(src, t + dt).energy - canonical(src, t - dt).energy) /
                       (2 * dt);
        CHECK(canonical(src, t).heat_capacity ==
              doctest::Approx(slope).epsilon(1e-6));
    }
}

TEST_CASE("entropy matches the Gibbs form") {
    auto src = discrete_source(lipkin_bundle(20, 2.2).eigenvalues());
    for (double t : {0.4, 1.1, 6.0}) {
        auto st = canonical(src, t);
        auto p = thermal_weights(src, t);
        double gibbs = 0.0;
        for (double v : p)
            if (v > 0.0) gibbs -= v * std::log(v);
        CHECK(st.entropy == doctest::Approx(gibbs).epsilon(1e-10));
    }
}

TEST_CASE("canonical caloric curve rises monotonically") {
    auto src = discrete_source(lipkin_bundle(40, 1.8).eigenvalues());
    std::vector<double> ts;
    for (int k = 0; k < 60; ++k) ts.push_back(0.05 + 0.2 * k);
    auto curve = canonical_caloric(src, ts);
    REQUIRE(curve.branches.size() == 1);
    const auto& br = curve.branches[0];
    for (std::size_t k = 1; k < br.energy.size(); ++k)
        CHECK(br.energy[k] >= br.energy[k - 1]);
    CHECK(curve.kind == CaloricCurve::Kind::canonical);
}

TEST_CASE("free-energy derivatives vanish without parameter dependence") {
    auto bundle = lipkin_bundle(16, 0.7);
    SymMatrix zero(bundle.dim());
    std::vector<SpectrumBundle> spectra{bundle, bundle, bundle};
    spectra[0].lambda = 0.6;
    spectra[2].lambda = 0.8;
    std::vector<SymMatrix> dh{zero, zero, zero};
    auto sweep = free_energy_lambda_derivatives(spectra, dh, 0.5);
    CHECK(sweep.first[1] == 0.0);
    CHECK(sweep.second[1] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(std::isnan(sweep.second[0]));
}

TEST_CASE("free-energy derivatives match finite differences of F") {
    int N = 30;
    double t = 0.5, lam = 0.8, h = 5e-4;
    std::vector<SpectrumBundle> spectra;
    std::vector<SymMatrix> dh;
    for (double l : {lam - h, lam, lam + h}) {
        spectra.push_back(lipkin_bundle(N, l));
        dh.push_back(lipkin_dH_dlambda(Lipkin{.N = N, .lambda = l, .chi = 0.0}));
    }
    auto sweep = free_energy_lambda_derivatives(spectra, dh, t);
    double fd1 = (sweep.free_energy[2] - sweep.free_energy[0]) / (2 * h);
    double fd2 =
        (sweep.free_energy[2] - 2 * sweep.free_energy[1] + sweep.free_energy[0]) /
        (h * h);
    CHECK(sweep.first[1] == doctest::Approx(fd1).epsilon(1e-5));
    CHECK(sweep.second[1] == doctest::Approx(fd2).epsilon(1e-5));
}

TEST_CASE("low-temperature curvature dip sharpens with system size") {
    double t = 0.05, h = 0.01;
    std::vector<double> dips, locations;
    for (int N : {50, 100, 200}) {
        double best = std::numeric_limits<double>::infinity(), at = 0.0;
        for (double lam = 0.7; lam < 1.3001; lam += 0.02) {
            std::vector<SpectrumBundle> spectra;
            std::vector<SymMatrix> dh;
            for (double l : {lam - h, lam, lam + h}) {
                spectra.push_back(lipkin_bundle(N, l));
                dh.push_back(lipkin_dH_dlambda(Lipkin{.N = N, .lambda = l, .chi = 0.0}));
            }
            double d2 = free_energy_lambda_derivatives(spectra, dh, t).second[1];
            if (d2 < best) {
                best = d2;
                at = lam;
            }
        }
        dips.push_back(best);
        locations.push_back(at);
    }
    CHECK(dips[1] < dips[0]);
    CHECK(dips[2] < dips[1]);
    CHECK(std::fabs(locations[1] - 1.0) <= std::fabs(locations[0] - 1.0));
    CHECK(std::fabs(locations[2] - 1.0) <= std::fabs(locations[1] - 1.0));
}

TEST_CASE("power-law density has linear microcanonical temperature") {
    int k = 4;
    EnergyGrid grid{1.0, 5.0, 801};
    DensityCurve rho{grid, {}, SmoothingKernel::gaussian(1.0)};
    for (int i = 0; i < grid.n_points; ++i)
        rho.values.push_back(std::pow(grid.at(i), k));
    auto micro = microcanonical_temperature(rho);
    for (std::size_t i = 0; i < micro.energy.size(); ++i)
        CHECK(micro.temperature[i] ==
              doctest::Approx(micro.energy[i] / k).epsilon(1e-4));
}

TEST_CASE("extensive power-law source: thermal peak near the canonical mean") {
    int k = 50;
    EnergyGrid grid{1e-6, 3.0, 3001};
    DensityCurve rho{grid, {}, SmoothingKernel::gaussian(1.0)};
    for (int i = 0; i < grid.n_points; ++i)
        rho.values.push_back(std::pow(grid.at(i), k));
    double t = 0.02;
    auto dist = thermal_distribution(rho, t);
    int peak = static_cast<int>(
        std::max_element(dist.values.begin(), dist.values.end()) -
        dist.values.begin());
    double mean = canonical(curve_source(rho), t).energy;
    CHECK(std::fabs(grid.at(peak) - mean) / mean < 2.0 / k);
    CHECK(dist.integral() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("triple-well density: negative and multivalued microcanonical branches") {
    auto rho = toy_density();
    auto micro = microcanonical_temperature(rho);

    // Analysis window away from the sampled-support edges.
    std::vector<double> ts;
    for (double t = 0.2; t < 0.51; t += 0.05) ts.push_back(t);
    auto curve = microcanonical_caloric(micro, ts);
    CHECK(curve.kind == CaloricCurve::Kind::microcanonical);

    bool multivalued = false;
    for (double t : ts) {
        int hits = 0;
        for (const auto& br : curve.branches)
            for (std::size_t p = 0; p < br.temperature.size(); ++p)
                if (br.temperature[p] == t && br.energy[p] > -4.0 && br.energy[p] < 0.5)
                    ++hits;
        if (hits >= 2) multivalued = true;
    }
    CHECK(multivalued);

    // A negative heat-capacity stretch: microcanonical temperature decreasing
    // over at least ten consecutive grid steps.
    int run = 0, longest = 0;
    for (std::size_t i = 1; i < micro.energy.size(); ++i) {
        bool ok = micro.energy[i] > -4.0 && micro.energy[i] < 0.5 &&
                  !std::isnan(micro.temperature[i]) &&
                  !std::isnan(micro.temperature[i - 1]) &&
                  micro.temperature[i] < micro.temperature[i - 1] &&
                  micro.temperature[i] > 0.0 && micro.temperature[i - 1] > 0.0;
        run = ok ? run + 1 : 0;
        longest = std::max(longest, run);
    }
    CHECK(longest >= 10);

    // Canonical side from the same density: finite, smooth, single-valued.
    auto src = curve_source(rho);
    std::vector<double> tg;
    for (int i = 0; i < 60; ++i) tg.push_back(0.1 + 0.05 * i);
    auto states = canonical(src, tg);
    double cmax = 0.0;
    for (const auto& st : states) {
        REQUIRE(std::isfinite(st.heat_capacity));
        cmax = std::max(cmax, st.heat_capacity);
    }
    double h = tg[1] - tg[0];
    for (std::size_t i = 1; i + 1 < states.size(); ++i) {
        double d2 = (states[i + 1].heat_capacity - 2 * states[i].heat_capacity +
                     states[i - 1].heat_capacity) /
                    (h * h);
        CHECK(std::fabs(d2) < 50.0 * cmax);
    }
}

TEST_CASE("bimodal thermal distribution where three roots coexist") {
    auto rho = toy_density();
    auto micro = microcanonical_temperature(rho);
    // Find a temperature with at least three caloric roots, then count the
    // humps of the thermal energy distribution.
    std::vector<double> ts;
    for (double t = 0.2; t < 0.61; t += 0.02) ts.push_back(t);
    auto curve = microcanonical_caloric(micro, ts);
    double t_multi = 0.0;
    for (double t : ts) {
        int hits = 0;
        for (const auto& br : curve.branches)
            for (std::size_t p = 0; p < br.temperature.size(); ++p)
                if (br.temperature[p] == t && br.energy[p] > -4.0 && br.energy[p] < 0.5)
                    ++hits;
        if (hits >= 3) {
            t_multi = t;
            break;
        }
    }
    REQUIRE(t_multi > 0.0);
    auto dist = thermal_distribution(rho, t_multi);
    int maxima = 0;
    double top = *std::max_element(dist.values.begin(), dist.values.end());
    for (int i = 1; i + 1 < dist.grid.n_points; ++i)
        if (dist.values[i] > dist.values[i - 1] && dist.values[i] > dist.values[i + 1] &&
            dist.values[i] > 1e-3 * top)
            ++maxima;
    CHECK(maxima >= 2);
}

TEST_CASE("Dicke critical temperatures") {
    // omega = omega0 = 1, delta = 0, lambda = 2: both lines coincide.
    auto both = dicke_critical_temperatures(1.0, 1.0, 2.0, 0.0);
    REQUIRE(both.t_c.has_value());
    CHECK(*both.t_c == doctest::Approx(1.0 / (2 * std::atanh(0.25))).epsilon(1e-12));
    CHECK(*both.t_c == doctest::Approx(1.9576).epsilon(1e-4));
    REQUIRE(both.t_0.has_value());
    CHECK(*both.t_0 == doctest::Approx(*both.t_c).epsilon(1e-12));

    // Just above threshold the critical temperature collapses to zero
    // (logarithmically in the coupling excess).
    double prev = std::numeric_limits<double>::infinity();
    for (double excess : {1e-2, 1e-5, 1e-9}) {
        auto near = dicke_critical_temperatures(1.0, 1.0, 0.5 * (1 + excess), 1.0);
        REQUIRE(near.t_c.has_value());
        CHECK(*near.t_c < prev);
        prev = *near.t_c;
        CHECK(!near.t_0.has_value());  // second line is absent at delta = 1
    }
    CHECK(prev < 0.05);

    // Strong coupling pushes it arbitrarily high.
    auto strong = dicke_critical_temperatures(1.0, 1.0, 50.0, 0.0);
    CHECK(*strong.t_c > 600.0);

    // Below threshold there is no thermal transition.
    auto none = dicke_critical_temperatures(1.0, 1.0, 0.4, 0.0);
    CHECK(!none.t_c.has_value());

    CHECK_THROWS_AS((void)dicke_critical_temperatures(-1.0, 1.0, 2.0, 0.0),
                    std::invalid_argument);
}

TEST_CASE("invalid thermal requests are rejected") {
    auto src = discrete_source({0.0, 1.0});
    CHECK_THROWS_AS((void)canonical(src, 0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)canonical(src, -2.0), std::invalid_argument);
    CHECK_THROWS_AS((void)discrete_source({}), std::invalid_argument);

    DensityCurve empty{{0.0, 1.0, 11}, std::vector<double>(11, 0.0),
                       SmoothingKernel::gaussian(1.0)};
    CHECK_THROWS_AS((void)curve_source(empty), std::invalid_argument);
    CHECK_THROWS_AS((void)microcanonical_temperature(empty), std::invalid_argument);
}
