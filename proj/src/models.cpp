#include "esqpt/models.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "esqpt/eigen.hpp"

namespace esqpt {

namespace {

// sqrt(j(j+1) - m(m+1)): raising-ladder coefficient J+|j m> = cplus |j m+1>.
double cplus(double j, double m) { return std::sqrt(j * (j + 1) - m * (m + 1)); }
// J-|j m> = cminus |j m-1>.
double cminus(double j, double m) { return std::sqrt(j * (j + 1) - m * (m - 1)); }

void require_atoms(int N, const char* who) {
    if (N < 1)
        throw std::invalid_argument(std::string(who) + ": particle number must be >= 1");
}

}  // namespace

// ---------------------------------------------------------------- bases ----

QuasispinBasis QuasispinBasis::from_two_j(int two_j) {
    if (two_j < 0) throw std::invalid_argument("QuasispinBasis: negative 2j");
    QuasispinBasis b;
    b.j = 0.5 * two_j;
    b.dim = two_j + 1;
    b.m_values.resize(b.dim);
    for (int k = 0; k < b.dim; ++k) b.m_values[k] = -b.j + k;
    return b;
}

ProductBasis ProductBasis::make(int two_j, int n_max, Parity block) {
    if (n_max < 0) throw std::invalid_argument("ProductBasis: negative cutoff");
    ProductBasis pb;
    pb.atom = QuasispinBasis::from_two_j(two_j);
    pb.field = BosonBasis{n_max};
    pb.block = block;
    pb.states.reserve(static_cast<std::size_t>(n_max + 1) * pb.atom.dim);
    for (int n = 0; n <= n_max; ++n)
        for (int k = 0; k < pb.atom.dim; ++k) {
            // (-1)^(n + m + j) = (-1)^(n + k) since k = m + j.
            bool even = ((n + k) % 2 == 0);
            if (block == Parity::none || (block == Parity::even) == even)
                pb.states.emplace_back(n, k);
        }
    if (pb.states.empty())
        throw std::invalid_argument("ProductBasis: empty parity block");
    return pb;
}

// ---------------------------------------------------------- atom sector ----

QuasispinOps build_quasispin_ops(const QuasispinBasis& basis) {
    int n = basis.dim;
    QuasispinOps ops{SymMatrix(n, n > 1 ? 1 : 0), SymMatrix(n, 0)};
    for (int k = 0; k < n; ++k) {
        ops.jz.set(k, k, basis.m_values[k]);
        if (k + 1 < n)
            ops.jx.set(k + 1, k, 0.5 * cplus(basis.j, basis.m_values[k]));
    }
    ops.jx.basis_tag = ops.jz.basis_tag = "quasispin 2j=" + std::to_string(n - 1);
    return ops;
}

// H = Jz - (lambda/N) [Jx + chi (Jz + N/2)]^2
SymMatrix build_lipkin(const Lipkin& spec) {
    require_atoms(spec.N, "build_lipkin");
    auto basis = QuasispinBasis::from_two_j(spec.N);
    auto ops = build_quasispin_ops(basis);

    SymMatrix b = ops.jx;
    for (int k = 0; k < basis.dim; ++k)
        b.add(k, k, spec.chi * (basis.m_values[k] + 0.5 * spec.N));

    SymMatrix h = square(b);
    h *= -spec.lambda / spec.N;
    h += ops.jz;
    h.basis_tag = ops.jz.basis_tag;
    return h;
}

SymMatrix lipkin_dH_dlambda(const Lipkin& spec) {
    require_atoms(spec.N, "lipkin_dH_dlambda");
    auto basis = QuasispinBasis::from_two_j(spec.N);
    auto ops = build_quasispin_ops(basis);

    SymMatrix b = ops.jx;
    for (int k = 0; k < basis.dim; ++k)
        b.add(k, k, spec.chi * (basis.m_values[k] + 0.5 * spec.N));

    SymMatrix h = square(b);
    h *= -1.0 / spec.N;
    h.basis_tag = ops.jz.basis_tag;
    return h;
}

// --------------------------------------------------------- Dicke family ----

namespace {

// Shared assembler for the extended Dicke Hamiltonian and its coupling
// derivatives.  c1 multiplies (b+ J- + b J+), c2 multiplies (b+ J+ + b J-).
SymMatrix dicke_assemble(const ExtendedDicke& spec, Parity block, bool with_diag,
                         double c1, double c2) {
    require_atoms(spec.N, "build_dicke");
    if (spec.n_max < 0) throw std::invalid_argument("build_dicke: negative cutoff");
    auto pb = ProductBasis::make(spec.N, spec.n_max, block);
    const double j = pb.atom.j;
    const int adim = pb.atom.dim;
    const int dim = pb.dim();

    // Row lookup for (n, k); -1 marks states outside the block.
    std::vector<int> row(static_cast<std::size_t>(spec.n_max + 1) * adim, -1);
    for (int r = 0; r < dim; ++r)
        row[static_cast<std::size_t>(pb.states[r].first) * adim + pb.states[r].second] = r;
    auto at = [&](int n, int k) -> int {
        if (n < 0 || n > spec.n_max || k < 0 || k >= adim) return -1;
        return row[static_cast<std::size_t>(n) * adim + k];
    };

    int w = 0;
    for (int r = 0; r < dim; ++r) {
        auto [n, k] = pb.states[r];
        for (int dk : {-1, +1}) {
            int t = at(n + 1, k + dk);
            if (t >= 0) w = std::max(w, t - r);
        }
    }

    SymMatrix h(dim, w);
    for (int r = 0; r < dim; ++r) {
        auto [n, k] = pb.states[r];
        double m = pb.atom.m_values[k];
        if (with_diag) h.set(r, r, spec.omega * n + spec.omega0 * m);
        // b+ J-: |n, m> -> sqrt(n+1) cminus(m) |n+1, m-1>; b J+ is the transpose.
        int t = at(n + 1, k - 1);
        if (t >= 0 && c1 != 0.0)
            h.add(t, r, c1 * std::sqrt(n + 1.0) * cminus(j, m));
        // b+ J+: |n, m> -> sqrt(n+1) cplus(m) |n+1, m+1>; b J- is the transpose.
        t = at(n + 1, k + 1);
        if (t >= 0 && c2 != 0.0)
            h.add(t, r, c2 * std::sqrt(n + 1.0) * cplus(j, m));
    }
    h.basis_tag = "dicke 2j=" + std::to_string(spec.N) + " nmax=" +
                  std::to_string(spec.n_max) +
                  (block == Parity::none ? "" : (block == Parity::even ? " even" : " odd"));
    return h;
}

}  // namespace

SymMatrix build_dicke(const ExtendedDicke& spec, Parity block) {
    double g = spec.lambda / std::sqrt(static_cast<double>(spec.N));
    return dicke_assemble(spec, block, true, g, g * spec.delta);
}

SymMatrix dicke_dH_dlambda(const ExtendedDicke& spec, Parity block) {
    double g = 1.0 / std::sqrt(static_cast<double>(spec.N));
    return dicke_assemble(spec, block, false, g, g * spec.delta);
}

SymMatrix dicke_dH_ddelta(const ExtendedDicke& spec, Parity block) {
    double g = spec.lambda / std::sqrt(static_cast<double>(spec.N));
    return dicke_assemble(spec, block, false, 0.0, g);
}

SymMatrix build_tc_block(const TavisCummingsBlock& spec, int n_cap) {
    require_atoms(spec.N, "build_tc_block");
    if (spec.M < 0) throw std::invalid_argument("build_tc_block: negative excitation number");
    auto basis = QuasispinBasis::from_two_j(spec.N);
    // States |n = M - k, m = k - j> for k in [k_lo, k_hi], ascending m.
    int k_lo = n_cap >= 0 ? std::max(0, spec.M - n_cap) : 0;
    int k_hi = std::min(spec.N, spec.M);
    if (k_hi < k_lo)
        throw std::invalid_argument("build_tc_block: empty block");
    int dim = k_hi - k_lo + 1;

    SymMatrix h(dim, dim > 1 ? 1 : 0);
    double g = spec.lambda / std::sqrt(static_cast<double>(spec.N));
    for (int r = 0; r < dim; ++r) {
        int k = k_lo + r;
        int n = spec.M - k;
        double m = basis.m_values[k];
        h.set(r, r, spec.omega * n + spec.omega0 * m);
        // b+ J- maps |n-1, m+1> (row r+1) to |n, m> (row r).
        if (r + 1 <= dim - 1)
            h.set(r + 1, r, g * std::sqrt(static_cast<double>(n)) *
                                cminus(basis.j, m + 1.0));
    }
    h.basis_tag = "tc 2j=" + std::to_string(spec.N) + " M=" + std::to_string(spec.M);
    return h;
}

// --------------------------------------------------------- Bose-Hubbard ----

SymMatrix build_two_site(const TwoSiteBoseHubbard& spec) {
    require_atoms(spec.N, "build_two_site");
    int dim = spec.N + 1;  // basis |n_plus>, n_minus = N - n_plus
    SymMatrix h(dim, dim > 1 ? 1 : 0);
    for (int np = 0; np <= spec.N; ++np) {
        int nm = spec.N - np;
        h.set(np, np, spec.eps_plus * np + spec.eps_minus * nm +
                          spec.U / spec.N *
                              (static_cast<double>(np) * (np - 1) +
                               static_cast<double>(nm) * (nm - 1)));
        // -tau b+(+) b(-): |np> -> -tau sqrt((np+1) nm) |np+1>.
        if (np + 1 <= spec.N)
            h.set(np + 1, np, -spec.tau * std::sqrt((np + 1.0) * nm));
    }
    h.basis_tag = "two-site N=" + std::to_string(spec.N);
    return h;
}

std::vector<std::vector<int>> chain_basis(int n_sites, int n_bosons) {
    if (n_sites < 1) throw std::invalid_argument("chain_basis: need at least one site");
    if (n_bosons < 0) throw std::invalid_argument("chain_basis: negative boson number");
    std::vector<std::vector<int>> states;
    std::vector<int> occ(n_sites, 0);
    // Lexicographic enumeration, last site absorbing the remainder.
    auto rec = [&](auto&& self, int site, int left) -> void {
        if (site == n_sites - 1) {
            occ[site] = left;
            states.push_back(occ);
            return;
        }
        for (int q = 0; q <= left; ++q) {
            occ[site] = q;
            self(self, site + 1, left - q);
        }
    };
    rec(rec, 0, n_bosons);
    return states;
}

SymMatrix build_chain(const BoseHubbardChain& spec) {
    auto states = chain_basis(spec.n_sites, spec.n_bosons);
    constexpr std::size_t kDimCeiling = 16384;
    if (states.size() > kDimCeiling)
        throw std::invalid_argument("build_chain: basis dimension " +
                                    std::to_string(states.size()) + " exceeds ceiling " +
                                    std::to_string(kDimCeiling));
    int dim = static_cast<int>(states.size());
    std::map<std::vector<int>, int> index;
    for (int r = 0; r < dim; ++r) index[states[r]] = r;

    SymMatrix h(dim);
    for (int r = 0; r < dim; ++r) {
        const auto& occ = states[r];
        double diag = spec.eps * spec.n_bosons;
        for (int i = 0; i < spec.n_sites; ++i)
            diag += 0.5 * spec.U * occ[i] * (occ[i] - 1);
        h.set(r, r, diag);
        // Nearest-neighbour hops with open (Dirichlet) ends.
        for (int i = 0; i + 1 < spec.n_sites; ++i)
            for (int dir : {+1, -1}) {
                int from = dir > 0 ? i : i + 1, to = dir > 0 ? i + 1 : i;
                if (occ[from] == 0) continue;
                std::vector<int> moved = occ;
                --moved[from];
                ++moved[to];
                int t = index.at(moved);
                if (t > r)
                    h.set(t, r, -spec.tau * std::sqrt(occ[from] * (occ[to] + 1.0)));
            }
    }
    h.basis_tag = "chain L=" + std::to_string(spec.n_sites) + " n=" +
                  std::to_string(spec.n_bosons);
    return h;
}

// ------------------------------------------------------- cutoff control ----

int converged_n_max(ExtendedDicke spec, int n_levels, double tol) {
    require_atoms(spec.N, "converged_n_max");
    if (n_levels < 1) throw std::invalid_argument("converged_n_max: need n_levels >= 1");
    auto probe = [&](int n_max) {
        spec.n_max = n_max;
        return eig::eigenvalues(build_dicke(spec));
    };
    int n_max = 8;
    while ((spec.N + 1) * (n_max + 1) < n_levels) n_max *= 2;
    std::vector<double> prev = probe(n_max);
    constexpr int kCeiling = 4096;
    while (n_max < kCeiling) {
        int next = 2 * n_max;
        std::vector<double> cur = probe(next);
        double span = cur.back() - cur.front();
        if (span <= 0.0) span = 1.0;
        if (std::fabs(cur[n_levels - 1] - prev[n_levels - 1]) < tol * span) return next;
        prev = std::move(cur);
        n_max = next;
    }
    throw std::runtime_error("converged_n_max: cutoff ceiling reached without convergence");
}

}  // namespace esqpt
