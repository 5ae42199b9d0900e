#include "esqpt/quench.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace esqpt {

// ------------------------------------------------------------- protocol ----

QuenchSetup make_quench(SpectrumBundle initial, SpectrumBundle final,
                        int initial_index) {
    if (initial.dim() != final.dim())
        throw std::invalid_argument("make_quench: Hamiltonians on different bases");
    if (initial_index < 0 || initial_index >= initial.dim())
        throw std::invalid_argument("make_quench: eigenstate index out of range");
    return {std::move(initial), std::move(final), initial_index};
}

double OverlapSet::total() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

double OverlapSet::mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * energies[i];
    return s;
}

double OverlapSet::variance() const {
    double mu = mean(), s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double d = energies[i] - mu;
        s += weights[i] * d * d;
    }
    return s;
}

double OverlapSet::long_time_average() const {
    double s = 0.0;
    for (double w : weights) s += w * w;
    return s;
}

double OverlapSet::participation_ratio() const { return 1.0 / long_time_average(); }

OverlapSet overlaps(const QuenchSetup& setup) {
    int n = setup.final.dim();
    const double* psi = setup.initial.vec(setup.initial_index);
    OverlapSet set{std::vector<double>(n), setup.final.eigenvalues()};
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        double c = 0.0;
        const double* v = setup.final.vec(i);
        for (int r = 0; r < n; ++r) c += v[r] * psi[r];
        set.weights[i] = c * c;
    }
    return set;
}

// ------------------------------------------------------- energy profiles ----

DensityCurve strength_function(const OverlapSet& set, const SmoothingKernel& kernel,
                               const EnergyGrid& grid) {
    return weighted_density(set.energies, set.weights, kernel, grid);
}

DensityCurve autocorrelation(const OverlapSet& set, const SmoothingKernel& kernel,
                             const EnergyGrid& grid) {
    // All pairwise energy differences, weighted by w_i w_k; the diagonal pairs
    // contribute the central peak of height sum w_i^2.
    std::size_t n = set.weights.size();
    std::vector<double> diffs, ww;
    diffs.reserve(n * n);
    ww.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            diffs.push_back(set.energies[i] - set.energies[k]);
            ww.push_back(set.weights[i] * set.weights[k]);
        }
    return weighted_density(diffs, ww, kernel, grid);
}

// ----------------------------------------------------------- time domain ----

std::vector<double> linear_times(double t_max, int n_points, double t_min) {
    if (n_points < 2 || !(t_max > t_min))
        throw std::invalid_argument("linear_times: bad grid request");
    std::vector<double> t(n_points);
    for (int i = 0; i < n_points; ++i)
        t[i] = t_min + (t_max - t_min) * i / (n_points - 1);
    return t;
}

std::vector<double> log_times(double t_min, double t_max, int n_points) {
    if (n_points < 2 || !(t_min > 0.0) || !(t_max > t_min))
        throw std::invalid_argument("log_times: bad grid request");
    std::vector<double> t(n_points);
    double ratio = std::log(t_max / t_min);
    for (int i = 0; i < n_points; ++i)
        t[i] = t_min * std::exp(ratio * i / (n_points - 1));
    return t;
}

std::vector<double> survival_probability(const OverlapSet& set,
                                         const std::vector<double>& times) {
    for (double t : times)
        if (!std::isfinite(t))
            throw std::invalid_argument("survival_probability: non-finite time");
    std::vector<double> p(times.size());
#pragma omp parallel for schedule(static)
    for (int k = 0; k < static_cast<int>(times.size()); ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < set.weights.size(); ++i) {
            re += set.weights[i] * std::cos(set.energies[i] * times[k]);
            im -= set.weights[i] * std::sin(set.energies[i] * times[k]);
        }
        p[k] = re * re + im * im;
    }
    return p;
}

std::vector<Revival> detect_revivals(const OverlapSet& set,
                                     const std::vector<double>& times,
                                     const std::vector<double>& p) {
    if (times.size() != p.size())
        throw std::invalid_argument("detect_revivals: grid mismatch");
    double threshold = 3.0 * set.long_time_average();
    // Skip the decay of the t = 0 peak: candidates only after P first falls
    // below the threshold.
    std::size_t start = 0;
    while (start < p.size() && p[start] >= threshold) ++start;
    std::vector<Revival> out;
    for (std::size_t i = std::max<std::size_t>(start, 1); i + 1 < p.size(); ++i)
        if (p[i] > p[i - 1] && p[i] > p[i + 1] && p[i] > threshold)
            out.push_back({times[i], p[i]});
    return out;
}

namespace {

// Components of psi in the eigenbasis.
std::vector<cplx> to_eigenbasis(const SpectrumBundle& h, const CplxState& psi) {
    int n = h.dim();
    std::vector<cplx> c(n);
    for (int i = 0; i < n; ++i) {
        cplx s = 0.0;
        const double* v = h.vec(i);
        for (int r = 0; r < n; ++r) s += v[r] * psi[r];
        c[i] = s;
    }
    return c;
}

void check_state(const SpectrumBundle& h, const CplxState& psi, const char* who) {
    if (static_cast<int>(psi.size()) != h.dim())
        throw std::invalid_argument(std::string(who) + ": state dimension mismatch");
}

}  // namespace

CplxState evolve(const SpectrumBundle& h, const CplxState& psi, double t) {
    check_state(h, psi, "evolve");
    int n = h.dim();
    std::vector<cplx> c = to_eigenbasis(h, psi);
    for (int i = 0; i < n; ++i)
        c[i] *= std::polar(1.0, -h.eigenvalues()[i] * t);
    CplxState out(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double* v = h.vec(i);
        for (int r = 0; r < n; ++r) out[r] += v[r] * c[i];
    }
    return out;
}

std::vector<cplx> otoc(const SpectrumBundle& h, const SymMatrix& a,
                       const SymMatrix& b, const CplxState& psi,
                       const std::vector<double>& times) {
    check_state(h, psi, "otoc");
    int n = h.dim();
    if (a.dim() != n || b.dim() != n)
        throw std::invalid_argument("otoc: operator basis mismatch");
    // Rotate everything once into the eigenbasis of H; B(t) is then the
    // matrix b_eig conjugated by e^{+-iEt} phases.
    std::vector<double> a_eig(n * n), b_eig(n * n);
    {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            std::vector<double> tmp(n, 0.0);
            a.matvec(h.vec(i), tmp.data());
            for (int k = 0; k < n; ++k) {
                double s = 0.0;
                const double* v = h.vec(k);
                for (int r = 0; r < n; ++r) s += v[r] * tmp[r];
                a_eig[k * n + i] = s;
            }
            tmp.assign(n, 0.0);
            b.matvec(h.vec(i), tmp.data());
            for (int k = 0; k < n; ++k) {
                double s = 0.0;
                const double* v = h.vec(k);
                for (int r = 0; r < n; ++r) s += v[r] * tmp[r];
                b_eig[k * n + i] = s;
            }
        }
    }
    std::vector<cplx> c = to_eigenbasis(h, psi);
    const std::vector<double>& e = h.eigenvalues();
    std::vector<cplx> out(times.size());
#pragma omp parallel for schedule(static)
    for (int it = 0; it < static_cast<int>(times.size()); ++it) {
        double t = times[it];
        std::vector<cplx> phase(n);
        for (int i = 0; i < n; ++i) phase[i] = std::polar(1.0, e[i] * t);
        // w1 = A c; w2 = B(t) w1; w3 = A w2; w4 = B(t) w3 (Hermitian B means
        // B(t)^dag = B(t)).
        std::vector<cplx> w1(n, 0.0), w2(n, 0.0), w3(n, 0.0), w4(n, 0.0);
        auto apply_bt = [&](const std::vector<cplx>& in, std::vector<cplx>& res) {
            for (int k = 0; k < n; ++k) {
                cplx s = 0.0;
                for (int i = 0; i < n; ++i)
                    s += b_eig[k * n + i] * std::conj(phase[i]) * in[i];
                res[k] = phase[k] * s;
            }
        };
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i) w1[k] += a_eig[k * n + i] * c[i];
        apply_bt(w1, w2);
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i) w3[k] += a_eig[k * n + i] * w2[i];
        apply_bt(w3, w4);
        cplx o = 0.0;
        for (int k = 0; k < n; ++k) o += std::conj(c[k]) * w4[k];
        out[it] = o;
    }
    return out;
}

std::vector<cplx> decoherence_factor(const SpectrumBundle& h0,
                                     const SpectrumBundle& h1, const CplxState& psi,
                                     const std::vector<double>& times) {
    check_state(h0, psi, "decoherence_factor");
    int n = h0.dim();
    if (h1.dim() != n)
        throw std::invalid_argument("decoherence_factor: basis mismatch");
    std::vector<cplx> a = to_eigenbasis(h0, psi);
    std::vector<cplx> b = to_eigenbasis(h1, psi);
    // Overlap matrix between the two eigenbases.
    std::vector<double> m(n * n);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            double s = 0.0;
            const double* vk = h0.vec(k);
            const double* vl = h1.vec(l);
            for (int r = 0; r < n; ++r) s += vk[r] * vl[r];
            m[k * n + l] = s;
        }
    std::vector<cplx> out(times.size());
#pragma omp parallel for schedule(static)
    for (int it = 0; it < static_cast<int>(times.size()); ++it) {
        double t = times[it];
        cplx r = 0.0;
        for (int k = 0; k < n; ++k) {
            cplx inner = 0.0;
            for (int l = 0; l < n; ++l)
                inner += m[k * n + l] * std::polar(1.0, -h1.eigenvalues()[l] * t) * b[l];
            r += std::conj(a[k]) * std::polar(1.0, h0.eigenvalues()[k] * t) * inner;
        }
        out[it] = r;
    }
    return out;
}

// ------------------------------------------------------ phase-space view ----

CplxState spin_coherent_state(const QuasispinBasis& basis, double theta, double phi) {
    if (!(theta >= 0.0) || !(theta <= std::numbers::pi))
        throw std::invalid_argument("spin_coherent_state: theta outside [0, pi]");
    int n = basis.dim;
    double two_j = n - 1.0;
    // log cos/sin of half-angles; the floor only matters where the binomial
    // amplitude vanishes anyway.
    double lc = std::log(std::max(std::cos(theta / 2), 1e-300));
    double ls = std::log(std::max(std::sin(theta / 2), 1e-300));
    CplxState psi(n);
    for (int k = 0; k < n; ++k) {  // k = m + j
        double log_amp = 0.5 * (std::lgamma(two_j + 1) - std::lgamma(k + 1.0) -
                                std::lgamma(two_j - k + 1)) +
                         k * lc + (two_j - k) * ls;
        psi[k] = std::polar(std::exp(log_amp), -(two_j - k) * phi);
    }
    return psi;
}

double SphereGrid::theta(int i) const { return (i + 0.5) * std::numbers::pi / n_theta; }

double SphereGrid::phi(int k) const { return k * 2.0 * std::numbers::pi / n_phi; }

double SphereGrid::cell_area(int i) const {
    return std::sin(theta(i)) * (std::numbers::pi / n_theta) *
           (2.0 * std::numbers::pi / n_phi);
}

double HusimiMap::integral() const {
    double s = 0.0;
    for (int i = 0; i < grid.n_theta; ++i) {
        double row = 0.0;
        for (int k = 0; k < grid.n_phi; ++k) row += values[i * grid.n_phi + k];
        s += row * grid.cell_area(i);
    }
    return s;
}

double HusimiMap::cap_mass(double theta0, double phi0, double radius) const {
    double ct0 = std::cos(theta0), st0 = std::sin(theta0);
    double s = 0.0;
    for (int i = 0; i < grid.n_theta; ++i) {
        double ct = std::cos(grid.theta(i)), st = std::sin(grid.theta(i));
        for (int k = 0; k < grid.n_phi; ++k) {
            double cos_d = ct * ct0 + st * st0 * std::cos(grid.phi(k) - phi0);
            if (std::acos(std::clamp(cos_d, -1.0, 1.0)) < radius)
                s += values[i * grid.n_phi + k] * grid.cell_area(i);
        }
    }
    return s;
}

HusimiMap husimi_snapshot(const QuasispinBasis& basis, const CplxState& psi,
                          const SphereGrid& grid) {
    int n = basis.dim;
    if (static_cast<int>(psi.size()) != n)
        throw std::invalid_argument("husimi_snapshot: state dimension mismatch");
    if (grid.n_theta < 2 || grid.n_phi < 2)
        throw std::invalid_argument("husimi_snapshot: degenerate grid");
    HusimiMap map{grid, std::vector<double>(grid.n_theta * grid.n_phi, 0.0)};
    double norm = n / (4.0 * std::numbers::pi);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < grid.n_theta; ++i) {
        CplxState coh = spin_coherent_state(basis, grid.theta(i), 0.0);
        for (int k = 0; k < grid.n_phi; ++k) {
            double ph = grid.phi(k);
            cplx s = 0.0;
            // <theta,phi|psi>: conjugation flips the -(2j-m') phase.
            for (int r = 0; r < n; ++r)
                s += std::conj(coh[r] * std::polar(1.0, -(n - 1.0 - r) * ph)) * psi[r];
            map.values[i * grid.n_phi + k] = std::norm(s) * norm;
        }
    }
    return map;
}

}  // namespace esqpt
