#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace esqpt {

// Real symmetric matrix with lower-triangle storage.  Hamiltonians with a
// known band structure (product bases of collective models) can declare a
// half-bandwidth at construction; only the lower band is then stored so that
// large photon-truncated bases fit in memory.  Entries outside a declared
// band are structural zeros.
class SymMatrix {
public:
    explicit SymMatrix(int n);
    SymMatrix(int n, int half_bandwidth);

    int dim() const { return n_; }
    // Declared half-bandwidth (n-1 for dense storage).
    int half_bandwidth() const { return w_; }
    bool banded() const { return banded_; }

    // Read access for arbitrary (i, j); returns 0 outside a declared band.
    double operator()(int i, int j) const;
    // Write access; (i, j) must lie inside the declared band.
    void set(int i, int j, double v);
    void add(int i, int j, double v);

    double trace() const;
    double max_abs() const;
    // Tightest half-bandwidth actually populated.
    int populated_bandwidth() const;
    bool all_finite() const;

    // y = A x.
    void matvec(const double* x, double* y) const;
    std::vector<double> matvec(const std::vector<double>& x) const;

    // Optional tag describing the basis the operator acts on.
    std::string basis_tag;

    SymMatrix& operator+=(const SymMatrix& other);
    SymMatrix& operator*=(double s);
    // Adds s to every diagonal entry.
    void shift_diagonal(double s);

    const std::vector<double>& raw() const { return data_; }

private:
    std::size_t index(int i, int j) const;  // requires j <= i and in band

    int n_;
    int w_;
    bool banded_;
    std::vector<double> data_;
};

// C = A B + B A symmetrized product not needed here; the models only require
// the square of a symmetric matrix, which is itself symmetric.
SymMatrix square(const SymMatrix& a);

}  // namespace esqpt
