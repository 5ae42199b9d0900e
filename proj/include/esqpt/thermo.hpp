#pragma once

#include <optional>
#include <vector>

#include "esqpt/spectral.hpp"

namespace esqpt {

// --------------------------------------------------------------- sources ----

// Common footing for discrete spectra and semiclassical density curves: a
// list of energies with nonnegative integration measure (level multiplicity
// or quadrature weight).
struct ThermalSource {
    std::vector<double> energies;
    std::vector<double> measure;
};

ThermalSource discrete_source(const std::vector<double>& levels);
ThermalSource curve_source(const DensityCurve& rho);

// ----------------------------------------------------------- canonical ----

struct ThermalState {
    double temperature = 0.0;
    double log_z = 0.0;  // ln Z
    double energy = 0.0;
    double variance = 0.0;
    double entropy = 0.0;
    double heat_capacity = 0.0;  // Var(E)/T^2

    double free_energy() const { return -temperature * log_z; }
};

// Overflow-safe (minimum-shifted) canonical averages; throws for T <= 0.
ThermalState canonical(const ThermalSource& source, double t);
std::vector<ThermalState> canonical(const ThermalSource& source,
                                    const std::vector<double>& t_grid);

// Normalized occupation p_i of each source entry at temperature t.
std::vector<double> thermal_weights(const ThermalSource& source, double t);

// Thermal energy distribution rho(E) e^{-E/T} / Z on the curve's grid.
DensityCurve thermal_distribution(const DensityCurve& rho, double t);

// ------------------------------------------------------- caloric curves ----

struct CaloricBranch {
    std::vector<double> temperature;
    std::vector<double> energy;
    std::vector<double> heat_capacity;  // dE/dT along the branch
};

struct CaloricCurve {
    enum class Kind { canonical, microcanonical };
    Kind kind = Kind::canonical;
    std::vector<CaloricBranch> branches;  // canonical curves have exactly one
};

CaloricCurve canonical_caloric(const ThermalSource& source,
                               const std::vector<double>& t_grid);

// --------------------------------------------- free-energy lambda sweep ----

// F(lambda) = -T ln Z and its first two lambda-derivatives along a sweep:
// dF/dlambda is the thermal average of the Hellmann-Feynman level slopes;
// the second derivative adds the level curvatures (centered differences of
// the slopes across the sweep) minus the slope variance over T.  Endpoint
// second derivatives are NaN.
struct FreeEnergySweep {
    std::vector<double> lambdas;
    std::vector<double> free_energy;
    std::vector<double> first;
    std::vector<double> second;
};

FreeEnergySweep free_energy_lambda_derivatives(
    const std::vector<SpectrumBundle>& spectra, const std::vector<SymMatrix>& dh,
    double t);

// -------------------------------------------------------- microcanonical ----

// 1 / (d ln rho / dE) on the interior of the curve's grid; entries where the
// density sits below floor_rel of its peak are NaN (temperature undefined).
struct MicrocanonicalCurve {
    std::vector<double> energy;
    std::vector<double> slope;        // d ln rho / dE
    std::vector<double> temperature;  // may be negative; NaN when undefined
};

MicrocanonicalCurve microcanonical_temperature(const DensityCurve& rho,
                                               double floor_rel = 1e-8);

// Branch enumeration of d ln rho/dE = 1/T per grid temperature, with
// continuity by nearest-energy matching across T steps.
CaloricCurve microcanonical_caloric(const MicrocanonicalCurve& micro,
                                    const std::vector<double>& t_grid);

// Gaussian smoothing of a sampled curve (truncated +-5 sigma stencil).
DensityCurve smooth_density(const DensityCurve& rho, const SmoothingKernel& kernel);

// ------------------------------------------------- Dicke critical lines ----

// T_c = omega0 / (2 artanh(lambda_c^2 / lambda^2)) above the ground-state
// critical coupling, and the analogous T_0 for the second critical line;
// absent below the respective coupling.
struct CriticalTemperatures {
    std::optional<double> t_c;
    std::optional<double> t_0;
};

CriticalTemperatures dicke_critical_temperatures(double omega, double omega0,
                                                 double lambda, double delta);

}  // namespace esqpt
