#include "esqpt/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace esqpt {

// ------------------------------------------------------------- spectrum ----

double SpectrumBundle::expectation(const SymMatrix& a, int i) const {
    return matrix_element(a, i, i);
}

double SpectrumBundle::matrix_element(const SymMatrix& a, int i, int k) const {
    if (a.dim() != dim())
        throw std::invalid_argument("SpectrumBundle: operator basis mismatch");
    std::vector<double> av = a.matvec(std::vector<double>(vec(k), vec(k) + dim()));
    double s = 0.0;
    for (int r = 0; r < dim(); ++r) s += vec(i)[r] * av[r];
    return s;
}

SpectrumBundle solve(const SymMatrix& h, ModelSpec model, double lambda) {
    if (!h.all_finite()) throw std::invalid_argument("solve: non-finite entries");
    return SpectrumBundle{eig::diagonalize(h), std::move(model), lambda};
}

// ------------------------------------------------------------ smoothing ----

SmoothingKernel SmoothingKernel::gaussian(double sigma) {
    if (sigma <= 0.0) throw std::invalid_argument("kernel width must be positive");
    return {Kind::gaussian, sigma};
}

SmoothingKernel SmoothingKernel::cauchy(double gamma) {
    if (gamma <= 0.0) throw std::invalid_argument("kernel width must be positive");
    return {Kind::cauchy, gamma};
}

double SmoothingKernel::operator()(double x) const {
    if (kind == Kind::gaussian) {
        double u = x / width;
        return std::exp(-0.5 * u * u) / (width * std::sqrt(2.0 * std::numbers::pi));
    }
    return width / (std::numbers::pi * (x * x + width * width));
}

double median_spacing(const std::vector<double>& levels) {
    if (levels.size() < 2)
        throw std::invalid_argument("median_spacing: need at least two levels");
    std::vector<double> gaps(levels.size() - 1);
    for (std::size_t i = 0; i + 1 < levels.size(); ++i) gaps[i] = levels[i + 1] - levels[i];
    std::sort(gaps.begin(), gaps.end());
    std::size_t mid = gaps.size() / 2;
    return gaps.size() % 2 ? gaps[mid] : 0.5 * (gaps[mid - 1] + gaps[mid]);
}

SmoothingKernel default_kernel(const std::vector<double>& levels) {
    return SmoothingKernel::gaussian(5.0 * median_spacing(levels));
}

EnergyGrid auto_grid(const std::vector<double>& levels, const SmoothingKernel& kernel,
                     int points_per_width) {
    if (levels.empty()) throw std::invalid_argument("auto_grid: empty spectrum");
    double lo = levels.front() - 5.0 * kernel.width;
    double hi = levels.back() + 5.0 * kernel.width;
    int n = static_cast<int>(std::ceil((hi - lo) / kernel.width * points_per_width)) + 1;
    return {lo, hi, std::max(n, 2)};
}

double DensityCurve::integral() const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) s += values[i] + values[i + 1];
    return 0.5 * s * grid.spacing();
}

DensityCurve DensityCurve::derivative() const {
    DensityCurve d{grid, std::vector<double>(values.size(), 0.0), kernel};
    double h = grid.spacing();
    int n = static_cast<int>(values.size());
    for (int i = 1; i + 1 < n; ++i) d.values[i] = (values[i + 1] - values[i - 1]) / (2 * h);
    if (n >= 2) {
        d.values[0] = (values[1] - values[0]) / h;
        d.values[n - 1] = (values[n - 1] - values[n - 2]) / h;
    }
    return d;
}

DensityCurve weighted_density(const std::vector<double>& levels,
                              const std::vector<double>& weights,
                              const SmoothingKernel& kernel, const EnergyGrid& grid) {
    if (grid.n_points < 2) throw std::invalid_argument("density grid needs >= 2 points");
    if (grid.spacing() > kernel.width / 4.0 + 1e-15 * kernel.width)
        throw std::invalid_argument("density grid too coarse for the kernel width");
    if (!weights.empty() && weights.size() != levels.size())
        throw std::invalid_argument("weight list does not match the level list");
    DensityCurve out{grid, std::vector<double>(grid.n_points, 0.0), kernel};
#pragma omp parallel for schedule(static)
    for (int p = 0; p < grid.n_points; ++p) {
        double e = grid.at(p);
        double s = 0.0;
        for (std::size_t i = 0; i < levels.size(); ++i)
            s += (weights.empty() ? 1.0 : weights[i]) * kernel(e - levels[i]);
        out.values[p] = s;
    }
    return out;
}

DensityCurve smoothed_level_density(const SpectrumBundle& spec,
                                    const SmoothingKernel& kernel,
                                    const EnergyGrid& grid) {
    return weighted_density(spec.eigenvalues(), {}, kernel, grid);
}

// ------------------------------------------------------ derived spectra ----

std::vector<double> level_slopes(const SpectrumBundle& spec, const SymMatrix& dh) {
    if (dh.dim() != spec.dim())
        throw std::invalid_argument("level_slopes: operator basis mismatch");
    std::vector<double> s(spec.dim());
    for (int i = 0; i < spec.dim(); ++i) s[i] = spec.expectation(dh, i);
    return s;
}

DensityCurve smoothed_flow(const SpectrumBundle& spec, const SymMatrix& dh,
                           const SmoothingKernel& kernel, const EnergyGrid& grid) {
    return weighted_density(spec.eigenvalues(), level_slopes(spec, dh), kernel, grid);
}

std::vector<double> flow_rate(const DensityCurve& flow, const DensityCurve& rho,
                              double floor_rel) {
    if (flow.values.size() != rho.values.size())
        throw std::invalid_argument("flow_rate: grid mismatch");
    double peak = *std::max_element(rho.values.begin(), rho.values.end());
    std::vector<double> phi(flow.values.size());
    for (std::size_t i = 0; i < phi.size(); ++i)
        phi[i] = rho.values[i] < floor_rel * peak
                     ? std::numeric_limits<double>::quiet_NaN()
                     : flow.values[i] / rho.values[i];
    return phi;
}

PeresLattice peres_lattice(const SpectrumBundle& spec, const SymMatrix& a,
                           std::string name) {
    PeresLattice lat{std::move(name), {}};
    lat.points.reserve(spec.dim());
    for (int i = 0; i < spec.dim(); ++i)
        lat.points.emplace_back(spec.eigenvalues()[i], spec.expectation(a, i));
    return lat;
}

DensityCurve observable_density(const SpectrumBundle& spec, const SymMatrix& a,
                                const SmoothingKernel& kernel, const EnergyGrid& grid) {
    return weighted_density(spec.eigenvalues(), level_slopes(spec, a), kernel, grid);
}

std::vector<double> geometric_tensor(const SpectrumBundle& spec, const SymMatrix& dh) {
    int n = spec.dim();
    if (dh.dim() != n)
        throw std::invalid_argument("geometric_tensor: operator basis mismatch");
    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < n; ++i)
        min_gap = std::min(min_gap, spec.eigenvalues()[i + 1] - spec.eigenvalues()[i]);
    if (n > 1 && min_gap < 1e-8)
        std::fprintf(stderr,
                     "geometric_tensor: near-degenerate pair (gap %.3e), metric may "
                     "be unreliable\n",
                     min_gap);
    // One dH |psi_i> per level, then pairwise overlaps.
    std::vector<std::vector<double>> dhv(n);
    for (int i = 0; i < n; ++i)
        dhv[i] = dh.matvec(std::vector<double>(spec.vec(i), spec.vec(i) + n));
    std::vector<double> g(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            if (k == i) continue;
            double elem = 0.0;
            for (int r = 0; r < n; ++r) elem += spec.vec(k)[r] * dhv[i][r];
            double de = spec.eigenvalues()[k] - spec.eigenvalues()[i];
            g[i] += elem * elem / (de * de);
        }
    return g;
}

DensityCurve convolve_densities(const DensityCurve& a, const DensityCurve& b) {
    double h = a.grid.spacing();
    if (std::fabs(b.grid.spacing() - h) > 1e-12 * h)
        throw std::invalid_argument("convolve_densities: incompatible grid spacing");
    int na = a.grid.n_points, nb = b.grid.n_points;
    EnergyGrid grid{a.grid.e_min + b.grid.e_min, a.grid.e_max + b.grid.e_max,
                    na + nb - 1};
    DensityCurve out{grid, std::vector<double>(na + nb - 1, 0.0), a.kernel};
#pragma omp parallel for schedule(static)
    for (int p = 0; p < na + nb - 1; ++p) {
        double s = 0.0;
        int lo = std::max(0, p - nb + 1), hi = std::min(na - 1, p);
        for (int i = lo; i <= hi; ++i) s += a.values[i] * b.values[p - i];
        out.values[p] = s * h;
    }
    return out;
}

DensityCurve oscillatory_density(const DensityCurve& fine, const DensityCurve& smooth) {
    if (fine.values.size() != smooth.values.size() ||
        std::fabs(fine.grid.e_min - smooth.grid.e_min) > 1e-12 ||
        std::fabs(fine.grid.e_max - smooth.grid.e_max) > 1e-12)
        throw std::invalid_argument("oscillatory_density: grids differ");
    DensityCurve out = fine;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] -= smooth.values[i];
    return out;
}

}  // namespace esqpt
