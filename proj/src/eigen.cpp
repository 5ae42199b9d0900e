#include "esqpt/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace esqpt::eig {
namespace detail {

namespace {

inline double pythag(double a, double b) {
    // Spectra handled here are O(1e3) in magnitude; no overflow guard needed.
    return std::sqrt(a * a + b * b);
}

inline double sign_of(double a, double b) { return b >= 0.0 ? std::fabs(a) : -std::fabs(a); }

}  // namespace

// Householder reduction with accumulated transforms, restructured so every
// output element is a serial dot product over a fixed index order: safe to
// parallelize over elements without changing the numerics.
void tridiagonalize(int n, std::vector<double>& z, std::vector<double>& d,
                    std::vector<double>& e) {
    auto Z = [&](int r, int c) -> double& { return z[r + static_cast<std::size_t>(c) * n]; };
    d.assign(n, 0.0);
    e.assign(n, 0.0);
    if (n == 1) {
        d[0] = Z(0, 0);
        Z(0, 0) = 1.0;
        return;
    }
    std::vector<double> u(n), p(n);
    for (int i = n - 1; i >= 1; --i) {
        int l = i - 1;
        // Row i left of the diagonal is the vector to annihilate.
        for (int k = 0; k <= l; ++k) u[k] = Z(i, k);
        double h = 0.0, scale = 0.0;
        if (l > 0)
            for (int k = 0; k <= l; ++k) scale += std::fabs(u[k]);
        if (scale == 0.0) {
            e[i] = l >= 0 ? u[l] : 0.0;
            for (int j = 0; j <= l; ++j) {
                Z(i, j) = 0.0;
                Z(j, i) = 0.0;
            }
            d[i] = 0.0;
            continue;
        }
        for (int k = 0; k <= l; ++k) {
            u[k] /= scale;
            h += u[k] * u[k];
        }
        double f = u[l];
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        u[l] = f - g;
        // p = A u / h on the leading (l+1) block, one fixed-order dot per row.
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (l > 127)
#endif
        for (int j = 0; j <= l; ++j) {
            double s = 0.0;
            for (int k = 0; k <= j; ++k) s += Z(j, k) * u[k];
            for (int k = j + 1; k <= l; ++k) s += Z(k, j) * u[k];
            p[j] = s / h;
        }
        double dot = 0.0;
        for (int j = 0; j <= l; ++j) dot += p[j] * u[j];
        double hh = dot / (h + h);
        for (int j = 0; j <= l; ++j) p[j] -= hh * u[j];
        // Rank-2 update of the lower triangle, independent per column.
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (l > 127)
#endif
        for (int j = 0; j <= l; ++j) {
            double fj = u[j], gj = p[j];
            for (int k = j; k <= l; ++k) Z(k, j) -= fj * p[k] + gj * u[k];
        }
        // Stash the Householder vector in column i for the accumulation pass;
        // row i becomes an identity row for that pass.
        for (int k = 0; k <= l; ++k) {
            Z(k, i) = u[k];
            Z(i, k) = 0.0;
        }
        d[i] = h;
    }
    // Accumulate the product of reflections into z.
    for (int i = 1; i < n; ++i) {
        int l = i - 1;
        double h = d[i];
        Z(n - 1, l) = Z(l, l);
        Z(l, l) = 1.0;
        if (h != 0.0) {
            for (int k = 0; k <= l; ++k) u[k] = Z(k, i);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (l > 127)
#endif
            for (int j = 0; j <= l; ++j) {
                double g = 0.0;
                for (int k = 0; k <= l; ++k) g += u[k] * Z(k, j);
                g /= h;
                for (int k = 0; k <= l; ++k) Z(k, j) -= g * u[k];
            }
        }
        for (int k = 0; k <= l; ++k) Z(k, i) = 0.0;
    }
    for (int i = 0; i < n; ++i) {
        d[i] = Z(n - 1, i);
        Z(n - 1, i) = 0.0;
    }
    Z(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

// Plain serial pass in the classical EISPACK tred2 order.
void tridiagonalize_reference(int n, std::vector<double>& z, std::vector<double>& d,
                              std::vector<double>& e) {
    auto Z = [&](int r, int c) -> double& { return z[r + static_cast<std::size_t>(c) * n]; };
    d.assign(n, 0.0);
    e.assign(n, 0.0);
    for (int i = 0; i < n; ++i) d[i] = Z(n - 1, i);
    if (n == 1) {
        d[0] = Z(0, 0);
        Z(0, 0) = 1.0;
        return;
    }
    for (int i = n - 1; i >= 1; --i) {
        int l = i - 1;
        double h = 0.0, scale = 0.0;
        if (l > 0)
            for (int k = 0; k <= l; ++k) scale += std::fabs(d[k]);
        if (scale == 0.0) {
            e[i] = d[l];
            for (int j = 0; j <= l; ++j) {
                d[j] = Z(l, j);
                Z(i, j) = 0.0;
                Z(j, i) = 0.0;
            }
            d[i] = 0.0;
            continue;
        }
        for (int k = 0; k <= l; ++k) {
            d[k] /= scale;
            h += d[k] * d[k];
        }
        double f = d[l];
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        d[l] = f - g;
        for (int j = 0; j <= l; ++j) e[j] = 0.0;
        for (int j = 0; j <= l; ++j) {
            f = d[j];
            Z(j, i) = f;
            g = e[j] + Z(j, j) * f;
            for (int k = j + 1; k <= l; ++k) {
                g += Z(k, j) * d[k];
                e[k] += Z(k, j) * f;
            }
            e[j] = g;
        }
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
            e[j] /= h;
            f += e[j] * d[j];
        }
        double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) e[j] -= hh * d[j];
        for (int j = 0; j <= l; ++j) {
            f = d[j];
            g = e[j];
            for (int k = j; k <= l; ++k) Z(k, j) -= f * e[k] + g * d[k];
            d[j] = Z(l, j);
            Z(i, j) = 0.0;
        }
        d[i] = h;
    }
    for (int i = 1; i < n; ++i) {
        int l = i - 1;
        Z(n - 1, l) = Z(l, l);
        Z(l, l) = 1.0;
        double h = d[i];
        if (h != 0.0) {
            for (int k = 0; k <= l; ++k) d[k] = Z(k, i) / h;
            for (int j = 0; j <= l; ++j) {
                double g = 0.0;
                for (int k = 0; k <= l; ++k) g += Z(k, i) * Z(k, j);
                for (int k = 0; k <= l; ++k) Z(k, j) -= g * d[k];
            }
        }
        for (int k = 0; k <= l; ++k) Z(k, i) = 0.0;
    }
    for (int i = 0; i < n; ++i) {
        d[i] = Z(n - 1, i);
        Z(n - 1, i) = 0.0;
    }
    Z(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

// Householder reduction without transform accumulation (EISPACK tred1);
// a is column-major and is destroyed.
void tred1(int n, std::vector<double>& a, std::vector<double>& d,
           std::vector<double>& e) {
    auto A = [&](int r, int c) -> double& { return a[r + static_cast<std::size_t>(c) * n]; };
    d.assign(n, 0.0);
    e.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        d[i] = A(n - 1, i);
        A(n - 1, i) = A(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        int l = i - 1;
        double h = 0.0, scale = 0.0;
        if (l >= 0)
            for (int k = 0; k <= l; ++k) scale += std::fabs(d[k]);
        if (l < 0 || scale == 0.0) {
            if (l >= 0)
                for (int j = 0; j <= l; ++j) {
                    d[j] = A(l, j);
                    A(l, j) = A(i, j);
                    A(i, j) = 0.0;
                }
            e[i] = 0.0;
            continue;
        }
        for (int k = 0; k <= l; ++k) {
            d[k] /= scale;
            h += d[k] * d[k];
        }
        double f = d[l];
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        d[l] = f - g;
        if (l > 0) {
            for (int j = 0; j <= l; ++j) e[j] = 0.0;
            for (int j = 0; j <= l; ++j) {
                f = d[j];
                g = e[j] + A(j, j) * f;
                for (int k = j + 1; k <= l; ++k) {
                    g += A(k, j) * d[k];
                    e[k] += A(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for (int j = 0; j <= l; ++j) {
                e[j] /= h;
                f += e[j] * d[j];
            }
            double hh = f / (h + h);
            for (int j = 0; j <= l; ++j) e[j] -= hh * d[j];
            for (int j = 0; j <= l; ++j) {
                f = d[j];
                g = e[j];
                for (int k = j; k <= l; ++k) A(k, j) -= f * e[k] + g * d[k];
            }
        }
        for (int j = 0; j <= l; ++j) {
            f = d[j];
            d[j] = A(l, j);
            A(l, j) = A(i, j);
            A(i, j) = f * scale;
        }
    }
}

// Implicit-shift QL for eigenvalues only (EISPACK tql1); d/e hold the
// tridiagonal matrix on entry, d the ascending eigenvalues on exit.
void tql1(int n, std::vector<double>& d, std::vector<double>& e) {
    if (n == 1) return;
    for (int i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    double f = 0.0, tst1 = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        double h = std::fabs(d[l]) + std::fabs(e[l]);
        if (tst1 < h) tst1 = h;
        int m = l;
        while (m < n && tst1 + std::fabs(e[m]) != tst1) ++m;
        if (m > n - 1) m = n - 1;
        double p;
        if (m != l) {
            for (;;) {
                if (iter++ == 30)
                    throw std::runtime_error("tql1: no convergence after 30 iterations");
                int l1 = l + 1;
                double g = d[l];
                p = (d[l1] - g) / (2.0 * e[l]);
                double r = pythag(p, 1.0);
                d[l] = e[l] / (p + sign_of(r, p));
                d[l1] = e[l] * (p + sign_of(r, p));
                double dl1 = d[l1];
                h = g - d[l];
                for (int i = l + 2; i < n; ++i) d[i] -= h;
                f += h;
                p = d[m];
                double c = 1.0, c2 = c, c3 = c;
                double el1 = e[l1];
                double s = 0.0, s2 = 0.0;
                for (int i = m - 1; i >= l; --i) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = pythag(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if (tst1 + std::fabs(e[l]) <= tst1) break;
            }
        }
        p = d[l] + f;
        // Insert into the already-sorted leading part.
        int i = l;
        while (i > 0 && p < d[i - 1]) {
            d[i] = d[i - 1];
            --i;
        }
        d[i] = p;
    }
}

// Implicit-shift QL with transform accumulation (EISPACK tql2).
void tql2(int n, std::vector<double>& d, std::vector<double>& e,
          std::vector<double>& z) {
    auto Z = [&](int r, int c) -> double& { return z[r + static_cast<std::size_t>(c) * n]; };
    if (n == 1) return;
    for (int i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    double f = 0.0, tst1 = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        double h = std::fabs(d[l]) + std::fabs(e[l]);
        if (tst1 < h) tst1 = h;
        int m = l;
        while (m < n && tst1 + std::fabs(e[m]) != tst1) ++m;
        if (m > n - 1) m = n - 1;
        if (m != l) {
            for (;;) {
                if (iter++ == 30)
                    throw std::runtime_error("tql2: no convergence after 30 iterations");
                int l1 = l + 1;
                double g = d[l];
                double p = (d[l1] - g) / (2.0 * e[l]);
                double r = pythag(p, 1.0);
                d[l] = e[l] / (p + sign_of(r, p));
                d[l1] = e[l] * (p + sign_of(r, p));
                double dl1 = d[l1];
                h = g - d[l];
                for (int i = l + 2; i < n; ++i) d[i] -= h;
                f += h;
                p = d[m];
                double c = 1.0, c2 = c, c3 = c;
                double el1 = e[l1];
                double s = 0.0, s2 = 0.0;
                for (int i = m - 1; i >= l; --i) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = pythag(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for (int k = 0; k < n; ++k) {
                        double t = Z(k, i + 1);
                        Z(k, i + 1) = s * Z(k, i) + c * t;
                        Z(k, i) = c * Z(k, i) - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if (tst1 + std::fabs(e[l]) <= tst1) break;
            }
        }
        d[l] += f;
    }
    // Order eigenvalues and eigenvectors ascending (selection pass).
    for (int i = 0; i < n - 1; ++i) {
        int k = i;
        double p = d[i];
        for (int j = i + 1; j < n; ++j)
            if (d[j] < p) {
                k = j;
                p = d[j];
            }
        if (k != i) {
            d[k] = d[i];
            d[i] = p;
            for (int r = 0; r < n; ++r) std::swap(Z(r, i), Z(r, k));
        }
    }
}

// Schwarz band reduction to tridiagonal form, eigenvalues-only variant
// (rational fast-Givens with diagonal rescaling, after BANDRD).
void bandrd(int n, int mb, std::vector<double>& band, std::vector<double>& d,
            std::vector<double>& e) {
    // 1-based accessor matching the classical layout.
    auto A = [&](int r, int c) -> double& {
        return band[static_cast<std::size_t>(r - 1) * mb + (c - 1)];
    };
    d.assign(n + 1, 1.0);
    e.assign(n + 1, 0.0);
    const double dmin = 5.4210108624275222e-20;   // 2^-64
    const double dminrt = 2.3283064365386963e-10; // 2^-32
    int m1 = mb - 1;
    if (m1 == 0) {
        for (int j = 1; j <= n; ++j) {
            d[j] = A(j, mb);
            e[j] = 0.0;
        }
        d.erase(d.begin());
        e.erase(e.begin());
        d.resize(n);
        e.resize(n);
        return;
    }
    if (m1 >= 2) {
        int n2 = n - 2;
        for (int k = 1; k <= n2; ++k) {
            int maxr = std::min(m1, n - k);
            for (int r = maxr; r >= 2; --r) {
                int kr = k + r;
                int mr = mb - r;
                double g = A(kr, mr);
                A(kr - 1, 1) = A(kr - 1, mr + 1);
                int ugl = k;
                for (int j = kr; j <= n; j += m1) {
                    int j1 = j - 1;
                    int j2 = j1 - 1;
                    if (g == 0.0) break;
                    double b1 = A(j1, 1) / g;
                    double b2 = b1 * d[j1] / d[j];
                    double s2 = 1.0 / (b1 * b2 + 1.0);
                    if (s2 < 0.5) {
                        b1 = g / A(j1, 1);
                        b2 = b1 * d[j] / d[j1];
                        double c2 = 1.0 - s2;
                        d[j1] = c2 * d[j1];
                        d[j] = c2 * d[j];
                        double f1 = 2.0 * A(j, m1);
                        double f2 = b1 * A(j1, mb);
                        A(j, m1) = -b2 * (b1 * A(j, m1) - A(j, mb)) - f2 + A(j, m1);
                        A(j1, mb) = b2 * (b2 * A(j, mb) + f1) + A(j1, mb);
                        A(j, mb) = b1 * (f2 - f1) + A(j, mb);
                        for (int l = ugl; l <= j2; ++l) {
                            int i2 = mb - j + l;
                            double u = A(j1, i2 + 1) + b2 * A(j, i2);
                            A(j, i2) = -b1 * A(j1, i2 + 1) + A(j, i2);
                            A(j1, i2 + 1) = u;
                        }
                        ugl = j;
                        A(j1, 1) += b2 * g;
                        if (j != n) {
                            int maxl = std::min(m1, n - j1);
                            for (int l = 2; l <= maxl; ++l) {
                                int i1 = j1 + l;
                                int i2 = mb - l;
                                double u = A(i1, i2) + b2 * A(i1, i2 + 1);
                                A(i1, i2 + 1) = -b1 * A(i1, i2) + A(i1, i2 + 1);
                                A(i1, i2) = u;
                            }
                            int i1 = j + m1;
                            if (i1 <= n) g = b2 * A(i1, 1);
                        }
                    } else {
                        double u = d[j1];
                        d[j1] = s2 * d[j];
                        d[j] = s2 * u;
                        double f1 = 2.0 * A(j, m1);
                        double f2 = b1 * A(j, mb);
                        double u2 = b1 * (f2 - f1) + A(j1, mb);
                        A(j, m1) = b2 * (b1 * A(j, m1) - A(j1, mb)) + f2 - A(j, m1);
                        A(j1, mb) = b2 * (b2 * A(j1, mb) + f1) + A(j, mb);
                        A(j, mb) = u2;
                        for (int l = ugl; l <= j2; ++l) {
                            int i2 = mb - j + l;
                            double u3 = b2 * A(j1, i2 + 1) + A(j, i2);
                            A(j, i2) = -A(j1, i2 + 1) + b1 * A(j, i2);
                            A(j1, i2 + 1) = u3;
                        }
                        ugl = j;
                        A(j1, 1) = b2 * A(j1, 1) + g;
                        if (j != n) {
                            int maxl = std::min(m1, n - j1);
                            for (int l = 2; l <= maxl; ++l) {
                                int i1 = j1 + l;
                                int i2 = mb - l;
                                double u3 = b2 * A(i1, i2) + A(i1, i2 + 1);
                                A(i1, i2 + 1) = -A(i1, i2) + b1 * A(i1, i2 + 1);
                                A(i1, i2) = u3;
                            }
                            int i1 = j + m1;
                            if (i1 <= n) {
                                g = A(i1, 1);
                                A(i1, 1) = b1 * A(i1, 1);
                            }
                        }
                    }
                }
            }
            if (k % 64 == 0) {
                // Rescale to avoid underflow of the fast-Givens scaling factors.
                for (int j = k; j <= n; ++j) {
                    if (d[j] >= dmin) continue;
                    int maxl = std::max(1, mb + 1 - j);
                    for (int l = maxl; l <= m1; ++l) A(j, l) *= dminrt;
                    if (j != n) {
                        int maxl2 = std::min(m1, n - j);
                        for (int l = 1; l <= maxl2; ++l) A(j + l, mb - l) *= dminrt;
                    }
                    A(j, mb) *= dmin;
                    d[j] /= dmin;
                }
            }
        }
    }
    // Fold the scaling matrix back in.
    for (int j = 2; j <= n; ++j) e[j] = std::sqrt(d[j]);
    double u = 1.0;
    for (int j = 2; j <= n; ++j) {
        A(j, m1) = u * e[j] * A(j, m1);
        u = e[j];
        A(j, mb) = d[j] * A(j, mb);
        d[j] = A(j, mb);
        e[j] = A(j, m1);
    }
    d[1] = A(1, mb);
    e[1] = 0.0;
    d.erase(d.begin());
    e.erase(e.begin());
    d.resize(n);
    e.resize(n);
}

}  // namespace detail

namespace {

std::vector<double> to_full_column_major(const SymMatrix& h) {
    int n = h.dim();
    std::vector<double> z(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - h.half_bandwidth()); j <= i; ++j) {
            double v = h(i, j);
            z[i + static_cast<std::size_t>(j) * n] = v;
            z[j + static_cast<std::size_t>(i) * n] = v;
        }
    return z;
}

void fix_signs(Spectrum& s) {
    int n = s.n;
    for (int k = 0; k < n; ++k) {
        double* v = s.vectors.data() + static_cast<std::size_t>(k) * n;
        int best = 0;
        for (int i = 1; i < n; ++i)
            if (std::fabs(v[i]) > std::fabs(v[best])) best = i;
        if (v[best] < 0.0)
            for (int i = 0; i < n; ++i) v[i] = -v[i];
    }
}

Spectrum diagonalize_impl(const SymMatrix& h, bool reference) {
    Spectrum s;
    s.n = h.dim();
    s.vectors = to_full_column_major(h);
    std::vector<double> e;
    if (reference)
        detail::tridiagonalize_reference(s.n, s.vectors, s.values, e);
    else
        detail::tridiagonalize(s.n, s.vectors, s.values, e);
    detail::tql2(s.n, s.values, e, s.vectors);
    fix_signs(s);
    return s;
}

}  // namespace

Spectrum diagonalize(const SymMatrix& h) { return diagonalize_impl(h, false); }

Spectrum diagonalize_reference(const SymMatrix& h) { return diagonalize_impl(h, true); }

std::vector<double> eigenvalues(const SymMatrix& h) {
    int n = h.dim();
    std::vector<double> d, e;
    if (h.banded() && 3 * (h.half_bandwidth() + 1) < n) {
        std::vector<double> band = h.raw();
        detail::bandrd(n, h.half_bandwidth() + 1, band, d, e);
    } else {
        std::vector<double> a = to_full_column_major(h);
        detail::tred1(n, a, d, e);
    }
    detail::tql1(n, d, e);
    return d;
}

}  // namespace esqpt::eig
