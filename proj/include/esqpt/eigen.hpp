#pragma once

#include <vector>

#include "esqpt/sym_matrix.hpp"

namespace esqpt::eig {

struct Spectrum {
    int n = 0;
    std::vector<double> values;   // ascending
    std::vector<double> vectors;  // column-major; eigenvector k at vec(k)
    const double* vec(int k) const {
        return vectors.data() + static_cast<std::size_t>(k) * n;
    }
};

// Full eigen-decomposition: Householder tridiagonalization followed by
// implicit-shift QL with accumulated transforms.  The tridiagonalization
// kernel is OpenMP-parallel with a fixed per-element reduction order, so the
// numeric output never depends on the thread count.  Eigenvector signs follow
// the convention that the largest-magnitude component is positive.
Spectrum diagonalize(const SymMatrix& h);

// The same decomposition through the plain serial EISPACK-ordered pass; kept
// as a reference implementation for tests and the kernel benchmark.
Spectrum diagonalize_reference(const SymMatrix& h);

// Eigenvalues only, ascending.  Operators with a declared narrow band go
// through Schwarz band reduction; everything else through Householder.
std::vector<double> eigenvalues(const SymMatrix& h);

namespace detail {

// All routines eat/emit n-sized 0-based arrays; z is column-major n*n.
void tridiagonalize(int n, std::vector<double>& z, std::vector<double>& d,
                    std::vector<double>& e);
void tridiagonalize_reference(int n, std::vector<double>& z, std::vector<double>& d,
                              std::vector<double>& e);
void tred1(int n, std::vector<double>& a, std::vector<double>& d,
           std::vector<double>& e);
void tql1(int n, std::vector<double>& d, std::vector<double>& e);
void tql2(int n, std::vector<double>& d, std::vector<double>& e,
          std::vector<double>& z);
// Schwarz band reduction.  band has n rows of mb slots (row-major): slot
// mb-1 holds the diagonal, slot mb-1-l the l-th subdiagonal of that row.
void bandrd(int n, int mb, std::vector<double>& band, std::vector<double>& d,
            std::vector<double>& e);

}  // namespace detail

}  // namespace esqpt::eig
