#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace esqpt {

using cplx = std::complex<double>;

// ------------------------------------------------------------- potentials ----

// Finite-range 1D potential: V vanishes outside [a, b] (checked at the ends
// to 1e-8) and the scattering particle has mass m with hbar = 1.
struct PotentialSpec {
    std::function<double(double)> v;
    double a = -1.0;
    double b = 1.0;
    double mass = 1.0;
};

// Rectangular barrier of height v0 on (0, width); exact for the sliced
// propagator because every slice samples the interior value only.
PotentialSpec square_barrier(double v0, double width, double mass = 1.0);

// Smooth barrier v0 / cosh^2(alpha x), truncated where the tail is below
// the support tolerance.
PotentialSpec eckart_barrier(double v0, double alpha, double mass = 1.0,
                             double half_range = 11.0);

// Two Gaussian-enveloped bumps with one interior dip at positive energy:
// V(x) = (c0 + c1 x + c2 x^2) exp(-x^2 / width_sq).  The default arguments
// mirror configs/double_barrier.json.
PotentialSpec double_barrier(double c0 = 0.5, double c1 = 0.1, double c2 = 0.5,
                             double width_sq = 10.0, double half_range = 16.0,
                             double mass = 1.0);

// -------------------------------------------------------------- scattering ----

// One energy point of the transmission problem with asymptotics
// e^{ipx} + alpha e^{-ipx} on the left and beta e^{ipx} on the right.
// phase = -i ln beta with the real part unwrapped along the ascending grid;
// delay is filled by complex_time_delay.
struct ScatteringResult {
    double energy = 0.0;
    cplx alpha{};
    cplx beta{};
    cplx phase{};
    cplx delay{};
};

// Integrates the stationary wave equation across the support for every energy
// (strictly ascending, all positive) and matches plane waves at both ends.
// The slice count doubles until transmission and reflection move by less than
// tol; failure to converge throws.
std::vector<ScatteringResult> transmit(const PotentialSpec& pot,
                                       const std::vector<double>& energies,
                                       double tol = 1e-9);

// Same, but inserts midpoint energies wherever the transmission phase moves
// by more than jump_tol between neighbours, so sharp resonances stay
// unwrappable.  Gives up (and leaves the big jump in place) after max_rounds.
std::vector<ScatteringResult> transmit_refined(const PotentialSpec& pot,
                                               const std::vector<double>& energies,
                                               double jump_tol = 1.0,
                                               int max_rounds = 40,
                                               double tol = 1e-9);

// Complex time delay and continuum density difference on the result grid.
struct DelayCurve {
    std::vector<double> energy;
    std::vector<cplx> delay;    // hbar d(conj Phi)/dE
    std::vector<cplx> density;  // delay / (pi hbar)
};

// Centered differences of the complex phase; the energy derivative is
// conjugated so that the attenuation counts the forbidden-region traversal
// positively.  Adjacent phase jumps beyond the unwrap guard ask for a finer
// grid (see transmit_refined).
DelayCurve complex_time_delay(std::vector<ScatteringResult>& results,
                              double hbar = 1.0);

// ------------------------------------------------------------ classical times ----

// Classical traversal times: allowed_shift = t_plus - t_zero, the time spent
// in classically allowed regions minus the free flight across [a, b];
// forbidden = t_minus, the inverted-potential time across forbidden regions.
struct WkbTimes {
    std::vector<double> energy;
    std::vector<double> allowed_shift;
    std::vector<double> forbidden;
};

WkbTimes wkb_times(const PotentialSpec& pot, const std::vector<double>& energies);

}  // namespace esqpt
