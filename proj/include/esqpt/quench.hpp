#pragma once

#include <complex>
#include <vector>

#include "esqpt/spectral.hpp"

namespace esqpt {

using cplx = std::complex<double>;
using CplxState = std::vector<cplx>;

// ------------------------------------------------------------- protocol ----

// A sudden parameter jump: the system sits in one eigenstate of the initial
// Hamiltonian and then evolves under the final one.  Both eigensolutions must
// live on the identical basis.
struct QuenchSetup {
    SpectrumBundle initial;
    SpectrumBundle final;
    int initial_index = 0;

    double delta_lambda() const { return final.lambda - initial.lambda; }
};

QuenchSetup make_quench(SpectrumBundle initial, SpectrumBundle final,
                        int initial_index = 0);

// Decomposition of the initial state over the final eigenbasis.
struct OverlapSet {
    std::vector<double> weights;   // w_i = |<psi_i(final)|psi_in>|^2
    std::vector<double> energies;  // final eigenvalues

    double total() const;                // sum w_i, unity for a complete basis
    double mean() const;                 // sum w_i E_i
    double variance() const;
    double long_time_average() const;    // sum w_i^2
    double participation_ratio() const;  // 1 / sum w_i^2
};

OverlapSet overlaps(const QuenchSetup& setup);

// ------------------------------------------------------- energy profiles ----

// Local density of states W(E) = sum_i w_i kernel(E - E_i).
DensityCurve strength_function(const OverlapSet& set, const SmoothingKernel& kernel,
                               const EnergyGrid& grid);

// Overlap self-correlation R(eps) = sum_{i,k} w_i w_k kernel(eps - E_i + E_k).
DensityCurve autocorrelation(const OverlapSet& set, const SmoothingKernel& kernel,
                             const EnergyGrid& grid);

// ----------------------------------------------------------- time domain ----

std::vector<double> linear_times(double t_max, int n_points, double t_min = 0.0);
// Log-spaced grid for revival hunting; both ends must be positive.
std::vector<double> log_times(double t_min, double t_max, int n_points);

// P(t) = |sum_i w_i e^{-i E_i t}|^2 (hbar = 1).
std::vector<double> survival_probability(const OverlapSet& set,
                                         const std::vector<double>& times);

struct Revival {
    double time = 0.0;
    double height = 0.0;
};

// Local maxima of P(t) exceeding 3x the long-time average, skipping the
// initial-decay plateau attached to t = 0.
std::vector<Revival> detect_revivals(const OverlapSet& set,
                                     const std::vector<double>& times,
                                     const std::vector<double>& p);

// e^{-i H t} psi through the eigendecomposition.
CplxState evolve(const SpectrumBundle& h, const CplxState& psi, double t);

// O(t) = <psi| B(t)^T A^T B(t) A |psi> with B(t) = e^{iHt} B e^{-iHt}
// evaluated by phase conjugation in the eigenbasis of H.
std::vector<cplx> otoc(const SpectrumBundle& h, const SymMatrix& a,
                       const SymMatrix& b, const CplxState& psi,
                       const std::vector<double>& times);

// R(t) = <psi| e^{+i H0 t} e^{-i H1 t} |psi> for an environment whose
// Hamiltonian depends on the system state.
std::vector<cplx> decoherence_factor(const SpectrumBundle& h0,
                                     const SpectrumBundle& h1, const CplxState& psi,
                                     const std::vector<double>& times);

// ------------------------------------------------------ phase-space view ----

// |theta, phi> with the m = +j state at theta = 0.
CplxState spin_coherent_state(const QuasispinBasis& basis, double theta, double phi);

// Midpoint rows in theta, uniform columns in phi.
struct SphereGrid {
    int n_theta = 256;
    int n_phi = 256;

    double theta(int i) const;
    double phi(int k) const;
    double cell_area(int i) const;  // sin(theta) dtheta dphi
};

struct HusimiMap {
    SphereGrid grid;
    std::vector<double> values;  // row-major (theta, phi)

    double integral() const;
    // Integral over the spherical cap of the given angular radius.
    double cap_mass(double theta0, double phi0, double radius) const;
};

// Q(theta, phi) = |<theta,phi|psi>|^2 (2j+1)/(4 pi).
HusimiMap husimi_snapshot(const QuasispinBasis& basis, const CplxState& psi,
                          const SphereGrid& grid = {});

}  // namespace esqpt
