#pragma once

#include <string>
#include <utility>
#include <vector>

#include "esqpt/eigen.hpp"
#include "esqpt/models.hpp"
#include "esqpt/sym_matrix.hpp"

namespace esqpt {

// ------------------------------------------------------------- spectrum ----

// Eigensolution of one model instance at one control-parameter value.
struct SpectrumBundle {
    eig::Spectrum spectrum;
    ModelSpec model;
    double lambda = 0.0;

    int dim() const { return spectrum.n; }
    const std::vector<double>& eigenvalues() const { return spectrum.values; }
    const double* vec(int k) const { return spectrum.vec(k); }
    // <psi_i| A |psi_i>.
    double expectation(const SymMatrix& a, int i) const;
    // <psi_i| A |psi_k>.
    double matrix_element(const SymMatrix& a, int i, int k) const;
};

SpectrumBundle solve(const SymMatrix& h, ModelSpec model = Lipkin{1, 0.0, 0.0},
                     double lambda = 0.0);

// ------------------------------------------------------------- smoothing ----

struct SmoothingKernel {
    enum class Kind { gaussian, cauchy };
    Kind kind = Kind::gaussian;
    double width = 1.0;  // sigma or gamma

    static SmoothingKernel gaussian(double sigma);
    static SmoothingKernel cauchy(double gamma);
    // Normalized profile value at displacement x.
    double operator()(double x) const;
};

double median_spacing(const std::vector<double>& levels);
// Adaptive default: five median level spacings.
SmoothingKernel default_kernel(const std::vector<double>& levels);

struct EnergyGrid {
    double e_min = 0.0, e_max = 1.0;
    int n_points = 2;

    double spacing() const { return (e_max - e_min) / (n_points - 1); }
    double at(int i) const { return e_min + spacing() * i; }
};

// Grid covering [min - 5 width, max + 5 width] at >= 4 points per width.
EnergyGrid auto_grid(const std::vector<double>& levels, const SmoothingKernel& kernel,
                     int points_per_width = 8);

struct DensityCurve {
    EnergyGrid grid;
    std::vector<double> values;
    SmoothingKernel kernel;

    double integral() const;      // trapezoidal
    DensityCurve derivative() const;  // centered differences, one-sided ends
};

// rho(E) = sum_i w_i kernel(E - E_i); empty weights mean w_i = 1.
DensityCurve weighted_density(const std::vector<double>& levels,
                              const std::vector<double>& weights,
                              const SmoothingKernel& kernel, const EnergyGrid& grid);

DensityCurve smoothed_level_density(const SpectrumBundle& spec,
                                    const SmoothingKernel& kernel,
                                    const EnergyGrid& grid);

// ------------------------------------------------------ derived spectra ----

// Hellmann-Feynman slopes dE_i/dlambda = <psi_i|dH/dlambda|psi_i>.
std::vector<double> level_slopes(const SpectrumBundle& spec, const SymMatrix& dh);

// j(E) = sum_i slope_i kernel(E - E_i) at one parameter value.
DensityCurve smoothed_flow(const SpectrumBundle& spec, const SymMatrix& dh,
                           const SmoothingKernel& kernel, const EnergyGrid& grid);

// Flow rate j/rho, masked (NaN) where rho < floor_rel * max(rho).
std::vector<double> flow_rate(const DensityCurve& flow, const DensityCurve& rho,
                              double floor_rel = 1e-6);

struct PeresLattice {
    std::string observable;
    std::vector<std::pair<double, double>> points;  // (E_i, <A>_i)
};

PeresLattice peres_lattice(const SpectrumBundle& spec, const SymMatrix& a,
                           std::string name);

DensityCurve observable_density(const SpectrumBundle& spec, const SymMatrix& a,
                                const SmoothingKernel& kernel, const EnergyGrid& grid);

// Single-parameter quantum metric g_i = sum_{k != i} |<k|dH|i>|^2 / (E_k - E_i)^2.
// Warns on stderr when the smallest gap drops below 1e-8.
std::vector<double> geometric_tensor(const SpectrumBundle& spec, const SymMatrix& dh);

// Discrete convolution with grid-spacing weight; grids must share a spacing.
DensityCurve convolve_densities(const DensityCurve& a, const DensityCurve& b);

// Pointwise difference rho_sigma - rho_bar on a common grid.
DensityCurve oscillatory_density(const DensityCurve& fine, const DensityCurve& smooth);

}  // namespace esqpt
