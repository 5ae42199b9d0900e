#pragma once

#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "esqpt/sym_matrix.hpp"

namespace esqpt {

// ---------------------------------------------------------------- bases ----

struct QuasispinBasis {
    double j = 0.0;             // half-integer quasispin size
    int dim = 1;                // 2j+1
    std::vector<double> m_values;  // -j .. +j ascending

    static QuasispinBasis from_two_j(int two_j);
};

struct BosonBasis {
    int n_max = 0;  // field-quantum truncation; dim = n_max+1
};

enum class Parity { none, even, odd };  // even/odd under (-1)^(N_b + Jz + j)

// Atom x field basis in (n_b major, m minor) order, optionally restricted to
// one parity block.
struct ProductBasis {
    QuasispinBasis atom;
    BosonBasis field;
    Parity block = Parity::none;
    std::vector<std::pair<int, int>> states;  // (n_b, m_index = m + j)

    int dim() const { return static_cast<int>(states.size()); }
    static ProductBasis make(int two_j, int n_max, Parity block);
};

// ---------------------------------------------------------- model specs ----

struct Lipkin {
    int N = 0;       // N = 2j
    double lambda = 0.0;
    double chi = 0.0;
};

struct ExtendedDicke {
    int N = 0;       // N = 2j atoms
    double omega = 1.0, omega0 = 1.0;
    double lambda = 0.0;
    double delta = 0.0;  // in [0, 1]
    int n_max = 0;       // photon truncation; see converged_n_max
};

struct TavisCummingsBlock {
    int N = 0;
    double omega = 1.0, omega0 = 1.0;
    double lambda = 0.0;
    int M = 0;  // conserved excitation number
};

struct TwoSiteBoseHubbard {
    int N = 0;  // total boson number
    double eps_plus = 0.0, eps_minus = 0.0;
    double tau = 0.0, U = 0.0;
};

struct BoseHubbardChain {
    int n_sites = 0;
    int n_bosons = 0;
    double eps = 0.0, tau = 0.0, U = 0.0;
};

struct PolynomialTerm {
    double coeff = 0.0;
    std::vector<int> powers;  // one exponent per coordinate
};

struct CustomPotential {
    int f = 1;
    std::vector<PolynomialTerm> terms;
    double mass = 1.0;
};

using ModelSpec = std::variant<Lipkin, ExtendedDicke, TavisCummingsBlock,
                               TwoSiteBoseHubbard, BoseHubbardChain, CustomPotential>;

// ------------------------------------------------------------- builders ----

struct QuasispinOps {
    SymMatrix jx, jz;
};

QuasispinOps build_quasispin_ops(const QuasispinBasis& basis);

SymMatrix build_lipkin(const Lipkin& spec);
SymMatrix lipkin_dH_dlambda(const Lipkin& spec);

SymMatrix build_dicke(const ExtendedDicke& spec, Parity block = Parity::none);
SymMatrix dicke_dH_dlambda(const ExtendedDicke& spec, Parity block = Parity::none);
SymMatrix dicke_dH_ddelta(const ExtendedDicke& spec, Parity block = Parity::none);

// Fixed-M block of the delta = 0 Dicke model.  n_cap, when nonnegative,
// additionally truncates the photon number (used to compare against a
// photon-truncated full-space build).
SymMatrix build_tc_block(const TavisCummingsBlock& spec, int n_cap = -1);

SymMatrix build_two_site(const TwoSiteBoseHubbard& spec);

// Fixed-boson-number block of the Bose-Hubbard chain, lexicographic
// occupation basis, Dirichlet ends.
SymMatrix build_chain(const BoseHubbardChain& spec);
std::vector<std::vector<int>> chain_basis(int n_sites, int n_bosons);

// Doubles the photon cutoff until the n_levels-th eigenvalue moves by less
// than tol * (spectral span); returns the converged n_max or throws when the
// ceiling is hit (cutoff-convergence failure).
int converged_n_max(ExtendedDicke spec, int n_levels, double tol = 1e-8);

}  // namespace esqpt
