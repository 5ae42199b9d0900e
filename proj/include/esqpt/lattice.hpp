#pragma once

#include <cstdint>
#include <vector>

#include "esqpt/spectral.hpp"

namespace esqpt {

// ------------------------------------------------------------ dispersion ----

// Cosine band E(k) = eps - 2 tau cos k for each of n noninteracting particles
// on the Brillouin interval; the n-fold quasimomentum integral plays the role
// of a configuration-space density with formal dimension n.
struct DispersionSpec {
    double eps = 0.0;
    double tau = 1.0;  // >= 0
    int n = 1;

    double band_min() const { return eps - 2.0 * tau; }
    double band_max() const { return eps + 2.0 * tau; }
};

// Normalized density of states by fine product-grid histogramming (n <= 3);
// grid points are bin centers.  n = 0 collapses onto the bin containing zero.
DensityCurve dos_from_dispersion(const DispersionSpec& spec, const EnergyGrid& grid,
                                 int k_points = 2000);

// Monte-Carlo variant for higher particle counts (any n >= 1).
DensityCurve dos_from_dispersion_mc(const DispersionSpec& spec, const EnergyGrid& grid,
                                    std::int64_t n_samples, std::uint64_t seed);

// --------------------------------------------------------- finite chains ----

// Contiguous eigenvalue cluster [first, last] of one boson-number block.
struct SubBand {
    int first = 0, last = 0;
    double e_min = 0.0, e_max = 0.0;

    int count() const { return last - first + 1; }
};

struct ChainBlock {
    int n_bosons = 0;
    SpectrumBundle spectrum;
    std::vector<SubBand> sub_bands;
    double gap_threshold = 0.0;  // clusters split where a gap exceeds this
};

// Diagonalizes every boson-number block up to n_top and reports detached
// sub-bands (gaps above 5x the block's median level spacing).
std::vector<ChainBlock> finite_chain_bands(const BoseHubbardChain& base, int n_top);

// Cluster decomposition of one sorted spectrum.
std::vector<SubBand> detect_sub_bands(const std::vector<double>& levels,
                                      double gap_factor = 5.0);

}  // namespace esqpt
