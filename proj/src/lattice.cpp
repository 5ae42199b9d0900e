#include "esqpt/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "esqpt/rng.hpp"

namespace esqpt {

// ------------------------------------------------------------ dispersion ----

namespace {

void check_spec(const DispersionSpec& spec) {
    if (spec.tau < 0.0 || spec.n < 0)
        throw std::invalid_argument("dispersion: tau and n must be nonnegative");
}

void deposit(DensityCurve& out, double e, double mass) {
    double h = out.grid.spacing();
    int bin = static_cast<int>(std::floor((e - out.grid.e_min) / h + 0.5));
    if (bin >= 0 && bin < out.grid.n_points) out.values[bin] += mass / h;
}

DensityCurve empty_curve(const EnergyGrid& grid) {
    if (grid.n_points < 2) throw std::invalid_argument("dos: degenerate grid");
    return {grid, std::vector<double>(grid.n_points, 0.0),
            SmoothingKernel::gaussian(grid.spacing())};
}

}  // namespace

DensityCurve dos_from_dispersion(const DispersionSpec& spec, const EnergyGrid& grid,
                                 int k_points) {
    check_spec(spec);
    if (spec.n > 3)
        throw std::invalid_argument(
            "dos_from_dispersion: product grid limited to n <= 3, use the "
            "Monte-Carlo variant");
    DensityCurve out = empty_curve(grid);
    if (spec.n == 0) {
        deposit(out, 0.0, 1.0);
        return out;
    }
    if (k_points < 2) throw std::invalid_argument("dos_from_dispersion: k grid");
    // Midpoint quasimomentum grid over the Brillouin interval.
    std::vector<double> band(k_points);
    for (int j = 0; j < k_points; ++j) {
        double k = -std::numbers::pi +
                   (j + 0.5) * 2.0 * std::numbers::pi / k_points;
        band[j] = spec.eps - 2.0 * spec.tau * std::cos(k);
    }
    double total = std::pow(static_cast<double>(k_points), spec.n);
    if (spec.n == 1) {
        for (double e : band) deposit(out, e, 1.0 / total);
    } else if (spec.n == 2) {
        for (double a : band)
            for (double b : band) deposit(out, a + b, 1.0 / total);
    } else {
        for (double a : band)
            for (double b : band)
                for (double c : band) deposit(out, a + b + c, 1.0 / total);
    }
    return out;
}

DensityCurve dos_from_dispersion_mc(const DispersionSpec& spec, const EnergyGrid& grid,
                                    std::int64_t n_samples, std::uint64_t seed) {
    check_spec(spec);
    if (spec.n < 1)
        throw std::invalid_argument("dos_from_dispersion_mc: need n >= 1");
    if (n_samples < 1)
        throw std::invalid_argument("dos_from_dispersion_mc: need samples");
    DensityCurve out = empty_curve(grid);
    CounterRng rng{seed};
    double h = grid.spacing();
    // Integer bin counts merge independently of the thread schedule.
    std::vector<std::int64_t> counts(grid.n_points, 0);
#pragma omp parallel
    {
        std::vector<std::int64_t> local(grid.n_points, 0);
#pragma omp for schedule(static)
        for (std::int64_t s = 0; s < n_samples; ++s) {
            double e = 0.0;
            for (int c = 0; c < spec.n; ++c) {
                double k = rng.uniform(static_cast<std::uint64_t>(s) * spec.n + c,
                                       -std::numbers::pi, std::numbers::pi);
                e += spec.eps - 2.0 * spec.tau * std::cos(k);
            }
            int bin = static_cast<int>(std::floor((e - grid.e_min) / h + 0.5));
            if (bin >= 0 && bin < grid.n_points) ++local[bin];
        }
#pragma omp critical
        for (int p = 0; p < grid.n_points; ++p) counts[p] += local[p];
    }
    for (int p = 0; p < grid.n_points; ++p)
        out.values[p] = static_cast<double>(counts[p]) /
                        (static_cast<double>(n_samples) * h);
    return out;
}

// --------------------------------------------------------- finite chains ----

std::vector<SubBand> detect_sub_bands(const std::vector<double>& levels,
                                      double gap_factor) {
    if (levels.empty()) return {};
    int n = static_cast<int>(levels.size());
    double threshold = 0.0;
    if (n > 1) threshold = gap_factor * median_spacing(levels);
    std::vector<SubBand> bands;
    int first = 0;
    for (int i = 1; i <= n; ++i) {
        if (i == n || (n > 1 && levels[i] - levels[i - 1] > threshold)) {
            bands.push_back({first, i - 1, levels[first], levels[i - 1]});
            first = i;
        }
    }
    return bands;
}

std::vector<ChainBlock> finite_chain_bands(const BoseHubbardChain& base, int n_top) {
    if (n_top < 0) throw std::invalid_argument("finite_chain_bands: negative block");
    std::vector<ChainBlock> blocks;
    for (int n = 0; n <= n_top; ++n) {
        BoseHubbardChain spec = base;
        spec.n_bosons = n;
        ChainBlock block;
        block.n_bosons = n;
        block.spectrum = solve(build_chain(spec), spec, spec.U);
        double threshold = 0.0;
        if (block.spectrum.dim() > 1)
            threshold = 5.0 * median_spacing(block.spectrum.eigenvalues());
        block.gap_threshold = threshold;
        block.sub_bands = detect_sub_bands(block.spectrum.eigenvalues());
        blocks.push_back(std::move(block));
    }
    return blocks;
}

}  // namespace esqpt
