#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "esqpt/models.hpp"
#include "esqpt/spectral.hpp"

namespace esqpt {

// ------------------------------------------------------ classical system ----

// Classical-limit Hamiltonian on a 2f-dimensional phase space.  Coordinates
// are ordered (q_1..q_f, p_1..p_f).  Collective (Bloch-sphere) degrees of
// freedom use the canonical disk chart zeta = (Q^2+P^2)/2 - 1, phi =
// atan2(P, Q) with the chosen pole at the origin and the rim at radius 2;
// field/plane degrees of freedom are unbounded.
struct ClassicalSystem {
    enum class Chart { bloch_disk, plane };

    int f = 1;
    std::vector<Chart> charts;       // one per DOF
    std::vector<double> hbar_eff;    // one per DOF
    std::function<double(const double*)> energy;
    std::function<void(const double*, double*)> gradient;
    // Invariant coordinates used to merge points found in different charts
    // (Bloch DOFs map to the embedded unit vector).
    std::function<std::vector<double>(const double*)> global_coords;
    std::string tag;

    bool in_domain(const double* x) const;
    double evaluate(const double* x) const;  // rejects out-of-chart points
    // Symmetrized central finite differences of the analytic gradient.
    std::vector<double> hessian(const double* x) const;
};

// Southern-origin chart by default; north_origin selects the complementary
// chart so pole artifacts of either chart can be cross-checked.
ClassicalSystem classical_lipkin(double lambda, double chi, double hbar = 1.0,
                                 bool north_origin = false);
ClassicalSystem classical_dicke(double omega, double omega0, double lambda,
                                double delta, double hbar_atom = 1.0,
                                double hbar_field = 1.0, bool north_origin = false);
// H = |p|^2/(2m) + polynomial potential.
ClassicalSystem classical_custom(const CustomPotential& spec, double hbar = 1.0);

// ------------------------------------------------------------ Monte Carlo ----

struct MonteCarlo {
    std::int64_t n_samples = 1'000'000;
    std::uint64_t seed = 1;
    // Per-coordinate sampling bounds; empty entries (lo >= hi) default to
    // [-2, 2] for Bloch coordinates and are rejected for plane coordinates.
    std::vector<std::pair<double, double>> box;
    double max_rel_err = 0.0;  // 0 disables the accuracy gate
};

struct WeylDensity {
    DensityCurve rho;
    std::vector<double> error;   // one-sigma statistical error of rho
    std::vector<double> volume;  // cumulative phase-space volume / (2 pi hbar)^f
};

// Smooth Weyl density: Monte-Carlo cumulative volume, isotonic check, then a
// five-point smooth differentiator.
WeylDensity weyl_density(const ClassicalSystem& sys, const EnergyGrid& grid,
                         const MonteCarlo& mc);

// --------------------------------------------------------- stationary set ----

struct StationaryPoint {
    std::vector<double> x;
    double energy = 0.0;
    std::vector<double> hessian_eigenvalues;  // ascending
    int index = 0;                            // negative-eigenvalue count
    bool degenerate = false;
    bool on_boundary = false;
};

struct MultistartOptions {
    int n_seeds = 300;
    std::uint64_t seed = 1;
    int max_iter = 200;
    double grad_tol = 1e-11;  // relative to the local energy scale
    std::vector<std::pair<double, double>> box;  // seeding bounds, as MonteCarlo
};

std::vector<StationaryPoint> find_stationary_points(const ClassicalSystem& sys,
                                                    const MultistartOptions& opts);
// Runs the finder on each chart and merges duplicates through global_coords;
// points seen only on a chart rim keep the on_boundary flag.
std::vector<StationaryPoint> find_stationary_points(
    const std::vector<ClassicalSystem>& charts, const MultistartOptions& opts);

// ----------------------------------------------------------- classification ----

struct SingularityPrediction {
    enum class Shape {
        step_up,
        step_down,
        log_up,
        log_down,
        inv_sqrt_right,
        inv_sqrt_left,
        power_law,
        unclassified
    };
    int derivative_order = 0;  // order of d/dE at which the feature appears
    Shape shape = Shape::unclassified;
    int sign = 0;           // sign of the singular coefficient
    double exponent = 0.0;  // L for power_law
};

// Nondegenerate Morse point in formal phase-space dimension d (= 2f for the
// shipped systems): order and shape from the index parity rules.
SingularityPrediction classify_formal(int dim, int r);
SingularityPrediction classify(const StationaryPoint& point, int f);
// Degenerate separable minimum with per-coordinate leading powers K_k.
SingularityPrediction classify_degenerate_minimum(const std::vector<int>& K);

// -------------------------------------------------------------- couplings ----

struct DickeCouplings {
    double lambda_c = 0.0;  // ground-state transition
    double lambda_0 = 0.0;  // +inf at delta = 1
};

DickeCouplings critical_couplings_dicke(double omega, double omega0, double delta);

// ------------------------------------------------------------ shell average ----

// Microcanonical average of a classical observable on shells of the given
// thickness around each grid energy; empty shells yield NaN (all-empty is an
// error).
std::vector<double> microcanonical_observable_average(
    const ClassicalSystem& sys, const std::function<double(const double*)>& a,
    const EnergyGrid& grid, const MonteCarlo& mc, double shell_thickness);

}  // namespace esqpt
