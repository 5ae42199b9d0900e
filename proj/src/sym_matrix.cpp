#include "esqpt/sym_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace esqpt {

SymMatrix::SymMatrix(int n) : n_(n), w_(n > 0 ? n - 1 : 0), banded_(false) {
    if (n <= 0) throw std::invalid_argument("SymMatrix: dimension must be positive");
    data_.assign(static_cast<std::size_t>(n) * (n + 1) / 2, 0.0);
}

SymMatrix::SymMatrix(int n, int half_bandwidth)
    : n_(n), w_(half_bandwidth), banded_(true) {
    if (n <= 0) throw std::invalid_argument("SymMatrix: dimension must be positive");
    if (w_ < 0 || w_ >= n) throw std::invalid_argument("SymMatrix: bad bandwidth");
    data_.assign(static_cast<std::size_t>(n) * (w_ + 1), 0.0);
}

std::size_t SymMatrix::index(int i, int j) const {
    if (banded_)
        return static_cast<std::size_t>(i) * (w_ + 1) + (j - i + w_);
    return static_cast<std::size_t>(i) * (i + 1) / 2 + j;
}

double SymMatrix::operator()(int i, int j) const {
    if (j > i) std::swap(i, j);
    if (i - j > w_) return 0.0;
    return data_[index(i, j)];
}

void SymMatrix::set(int i, int j, double v) {
    if (j > i) std::swap(i, j);
    if (i - j > w_) throw std::out_of_range("SymMatrix::set outside declared band");
    data_[index(i, j)] = v;
}

void SymMatrix::add(int i, int j, double v) {
    if (j > i) std::swap(i, j);
    if (i - j > w_) throw std::out_of_range("SymMatrix::add outside declared band");
    data_[index(i, j)] += v;
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
}

double SymMatrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
}

int SymMatrix::populated_bandwidth() const {
    int w = 0;
    for (int i = 0; i < n_; ++i)
        for (int j = std::max(0, i - w_); j < i - w; ++j)
            if ((*this)(i, j) != 0.0) w = i - j;
    return w;
}

bool SymMatrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void SymMatrix::matvec(const double* x, double* y) const {
    for (int i = 0; i < n_; ++i) {
        double s = 0.0;
        int lo = std::max(0, i - w_);
        int hi = std::min(n_ - 1, i + w_);
        for (int j = lo; j <= hi; ++j) s += (*this)(i, j) * x[j];
        y[i] = s;
    }
}

std::vector<double> SymMatrix::matvec(const std::vector<double>& x) const {
    std::vector<double> y(n_);
    matvec(x.data(), y.data());
    return y;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& other) {
    if (other.n_ != n_) throw std::invalid_argument("SymMatrix: dimension mismatch");
    if (other.banded_ == banded_ && other.w_ == w_) {
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    } else {
        if (other.w_ > w_) throw std::invalid_argument("SymMatrix: band mismatch");
        for (int i = 0; i < n_; ++i)
            for (int j = std::max(0, i - other.w_); j <= i; ++j)
                add(i, j, other(i, j));
    }
    return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

void SymMatrix::shift_diagonal(double s) {
    for (int i = 0; i < n_; ++i) add(i, i, s);
}

SymMatrix square(const SymMatrix& a) {
    int n = a.dim();
    int w = std::min(n - 1, 2 * a.half_bandwidth());
    SymMatrix c = a.banded() ? SymMatrix(n, w) : SymMatrix(n);
    for (int i = 0; i < n; ++i) {
        for (int j = std::max(0, i - w); j <= i; ++j) {
            int lo = std::max({0, i - a.half_bandwidth(), j - a.half_bandwidth()});
            int hi = std::min({n - 1, i + a.half_bandwidth(), j + a.half_bandwidth()});
            double s = 0.0;
            for (int k = lo; k <= hi; ++k) s += a(i, k) * a(k, j);
            c.set(i, j, s);
        }
    }
    c.basis_tag = a.basis_tag;
    return c;
}

}  // namespace esqpt
