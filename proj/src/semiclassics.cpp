#include "esqpt/semiclassics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "esqpt/eigen.hpp"
#include "esqpt/rng.hpp"

namespace esqpt {

namespace {

constexpr double kRimMargin = 1e-9;

// Smooth ingredients of the Bloch disk chart: for sign +1 the origin is the
// lower pole (zeta = -1), for sign -1 the upper pole.
struct BlochChart {
    double sign;  // +1 south origin, -1 north origin

    double zeta(double q, double p) const { return sign * (0.5 * (q * q + p * p) - 1.0); }
    // sqrt(1 - zeta^2) (cos phi, sin phi) = (q, p) sqrt(4 - rho^2) / 2.
    double root(double q, double p) const {
        return std::sqrt(std::max(0.0, 4.0 - q * q - p * p));
    }
};

std::vector<double> bloch_vector(const BlochChart& ch, double q, double p) {
    double r = 0.5 * ch.root(q, p);
    return {q * r, p * r, ch.zeta(q, p)};
}

int dof_of_coordinate(int f, int c) { return c < f ? c : c - f; }

std::vector<std::pair<double, double>> resolve_box(
    const ClassicalSystem& sys, const std::vector<std::pair<double, double>>& box) {
    int dim = 2 * sys.f;
    std::vector<std::pair<double, double>> out(dim, {0.0, 0.0});
    for (int c = 0; c < dim; ++c) {
        bool given = c < static_cast<int>(box.size()) && box[c].second > box[c].first;
        if (given) {
            out[c] = box[c];
        } else if (sys.charts[dof_of_coordinate(sys.f, c)] ==
                   ClassicalSystem::Chart::bloch_disk) {
            out[c] = {-2.0, 2.0};
        } else {
            throw std::invalid_argument(
                "unbounded coordinate needs an explicit sampling box");
        }
    }
    return out;
}

// Gaussian elimination with partial pivoting; returns false when singular.
bool solve_dense(int n, std::vector<double> a, std::vector<double> b,
                 std::vector<double>& x) {
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(a[r * n + c]) > std::fabs(a[piv * n + c])) piv = r;
        if (a[piv * n + c] == 0.0) return false;
        if (piv != c) {
            for (int k = 0; k < n; ++k) std::swap(a[piv * n + k], a[c * n + k]);
            std::swap(b[piv], b[c]);
        }
        for (int r = c + 1; r < n; ++r) {
            double fct = a[r * n + c] / a[c * n + c];
            for (int k = c; k < n; ++k) a[r * n + k] -= fct * a[c * n + k];
            b[r] -= fct * b[c];
        }
    }
    x.assign(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int k = r + 1; k < n; ++k) s -= a[r * n + k] * x[k];
        x[r] = s / a[r * n + r];
    }
    return true;
}

}  // namespace

// ------------------------------------------------------- system methods ----

bool ClassicalSystem::in_domain(const double* x) const {
    for (int d = 0; d < f; ++d)
        if (charts[d] == Chart::bloch_disk &&
            x[d] * x[d] + x[d + f] * x[d + f] > 4.0)
            return false;
    return true;
}

double ClassicalSystem::evaluate(const double* x) const {
    if (!in_domain(x))
        throw std::domain_error(tag + ": point outside the Bloch chart");
    return energy(x);
}

std::vector<double> ClassicalSystem::hessian(const double* x) const {
    int dim = 2 * f;
    std::vector<double> h(static_cast<std::size_t>(dim) * dim, 0.0);
    std::vector<double> xp(x, x + dim), gp(dim), gm(dim);
    for (int c = 0; c < dim; ++c) {
        double step = 1e-5 * std::max(1.0, std::fabs(x[c]));
        xp[c] = x[c] + step;
        gradient(xp.data(), gp.data());
        xp[c] = x[c] - step;
        gradient(xp.data(), gm.data());
        xp[c] = x[c];
        for (int r = 0; r < dim; ++r) h[r * dim + c] = (gp[r] - gm[r]) / (2.0 * step);
    }
    for (int r = 0; r < dim; ++r)
        for (int c = r + 1; c < dim; ++c) {
            double s = 0.5 * (h[r * dim + c] + h[c * dim + r]);
            h[r * dim + c] = h[c * dim + r] = s;
        }
    return h;
}

// ------------------------------------------------------- shipped systems ----

ClassicalSystem classical_lipkin(double lambda, double chi, double hbar,
                                 bool north_origin) {
    BlochChart ch{north_origin ? -1.0 : 1.0};
    ClassicalSystem sys;
    sys.f = 1;
    sys.charts = {ClassicalSystem::Chart::bloch_disk};
    sys.hbar_eff = {hbar};
    sys.tag = "classical collective";
    sys.energy = [=](const double* x) {
        double q = x[0], p = x[1];
        double zeta = ch.zeta(q, p);
        double u = 0.5 * q * ch.root(q, p) + chi * (zeta + 1.0);
        return zeta - 0.5 * lambda * u * u;
    };
    sys.gradient = [=](const double* x, double* g) {
        double q = x[0], p = x[1];
        double zeta = ch.zeta(q, p);
        double rt = ch.root(q, p);
        double inv = rt > 1e-12 ? 1.0 / rt : 0.0;
        double u = 0.5 * q * rt + chi * (zeta + 1.0);
        double du_dq = 0.5 * rt - 0.5 * q * q * inv + chi * ch.sign * q;
        double du_dp = -0.5 * q * p * inv + chi * ch.sign * p;
        g[0] = ch.sign * q - lambda * u * du_dq;
        g[1] = ch.sign * p - lambda * u * du_dp;
    };
    sys.global_coords = [=](const double* x) { return bloch_vector(ch, x[0], x[1]); };
    return sys;
}

ClassicalSystem classical_dicke(double omega, double omega0, double lambda,
                                double delta, double hbar_atom, double hbar_field,
                                bool north_origin) {
    BlochChart ch{north_origin ? -1.0 : 1.0};
    ClassicalSystem sys;
    sys.f = 2;
    sys.charts = {ClassicalSystem::Chart::bloch_disk, ClassicalSystem::Chart::plane};
    sys.hbar_eff = {hbar_atom, hbar_field};
    sys.tag = "classical atom-field";
    // x = (Q, q, P, p): collective pair first, field pair second.
    sys.energy = [=](const double* x) {
        double Q = x[0], q = x[1], P = x[2], p = x[3];
        double r = 0.5 * ch.root(Q, P);
        return 0.5 * omega * (q * q + p * p) + omega0 * ch.zeta(Q, P) +
               lambda * ((1.0 + delta) * q * Q * r - (1.0 - delta) * p * P * r);
    };
    sys.gradient = [=](const double* x, double* g) {
        double Q = x[0], q = x[1], P = x[2], p = x[3];
        double rt = ch.root(Q, P);
        double inv = rt > 1e-12 ? 1.0 / rt : 0.0;
        double dx_dQ = 0.5 * rt - 0.5 * Q * Q * inv;  // d(Q rt/2)/dQ
        double dxy = -0.5 * Q * P * inv;              // mixed derivative
        double dy_dP = 0.5 * rt - 0.5 * P * P * inv;
        double cx = lambda * (1.0 + delta) * q, cy = -lambda * (1.0 - delta) * p;
        g[0] = omega0 * ch.sign * Q + cx * dx_dQ + cy * dxy;
        g[2] = omega0 * ch.sign * P + cx * dxy + cy * dy_dP;
        g[1] = omega * q + lambda * (1.0 + delta) * 0.5 * Q * rt;
        g[3] = omega * p - lambda * (1.0 - delta) * 0.5 * P * rt;
    };
    sys.global_coords = [=](const double* x) {
        auto v = bloch_vector(ch, x[0], x[2]);
        v.push_back(x[1]);
        v.push_back(x[3]);
        return v;
    };
    return sys;
}

ClassicalSystem classical_custom(const CustomPotential& spec, double hbar) {
    if (spec.f < 1) throw std::invalid_argument("classical_custom: need f >= 1");
    for (const auto& t : spec.terms)
        if (static_cast<int>(t.powers.size()) != spec.f)
            throw std::invalid_argument("classical_custom: term arity mismatch");
    if (spec.mass <= 0.0) throw std::invalid_argument("classical_custom: bad mass");
    ClassicalSystem sys;
    sys.f = spec.f;
    sys.charts.assign(spec.f, ClassicalSystem::Chart::plane);
    sys.hbar_eff.assign(spec.f, hbar);
    sys.tag = "classical potential";
    auto terms = spec.terms;
    double mass = spec.mass;
    int f = spec.f;
    sys.energy = [=](const double* x) {
        double e = 0.0;
        for (int d = 0; d < f; ++d) e += x[f + d] * x[f + d] / (2.0 * mass);
        for (const auto& t : terms) {
            double v = t.coeff;
            for (int d = 0; d < f; ++d) v *= std::pow(x[d], t.powers[d]);
            e += v;
        }
        return e;
    };
    sys.gradient = [=](const double* x, double* g) {
        for (int d = 0; d < f; ++d) {
            g[f + d] = x[f + d] / mass;
            g[d] = 0.0;
        }
        for (const auto& t : terms)
            for (int d = 0; d < f; ++d) {
                if (t.powers[d] == 0) continue;
                double v = t.coeff * t.powers[d] * std::pow(x[d], t.powers[d] - 1);
                for (int k = 0; k < f; ++k)
                    if (k != d) v *= std::pow(x[k], t.powers[k]);
                g[d] += v;
            }
    };
    sys.global_coords = [f](const double* x) {
        return std::vector<double>(x, x + 2 * f);
    };
    return sys;
}

// ----------------------------------------------------------- Weyl density ----

WeylDensity weyl_density(const ClassicalSystem& sys, const EnergyGrid& grid,
                         const MonteCarlo& mc) {
    if (mc.n_samples < 1) throw std::invalid_argument("weyl_density: no samples");
    auto box = resolve_box(sys, mc.box);
    int dim = 2 * sys.f;
    double box_volume = 1.0;
    for (auto [lo, hi] : box) box_volume *= hi - lo;
    double cell = std::pow(2.0 * std::numbers::pi, sys.f);
    for (double hb : sys.hbar_eff) cell *= hb;

    int n = grid.n_points;
    double h = grid.spacing();
    // bins[k]: samples with E_{k-1} < H <= E_k; bins[0]: H <= E_0.
    std::vector<std::int64_t> bins(n + 1, 0);
    CounterRng rng{mc.seed};
#pragma omp parallel
    {
        std::vector<std::int64_t> local(n + 1, 0);
        std::vector<double> x(dim);
#pragma omp for schedule(static) nowait
        for (std::int64_t t = 0; t < mc.n_samples; ++t) {
            for (int c = 0; c < dim; ++c)
                x[c] = rng.uniform(static_cast<std::uint64_t>(t) * dim + c,
                                   box[c].first, box[c].second);
            if (!sys.in_domain(x.data())) continue;
            double e = sys.energy(x.data());
            if (e > grid.e_max) continue;
            int k = e <= grid.e_min
                        ? 0
                        : static_cast<int>(std::ceil((e - grid.e_min) / h));
            local[std::min(k, n)] += 1;
        }
#pragma omp critical
        for (int k = 0; k <= n; ++k) bins[k] += local[k];
    }

    double norm = box_volume / (static_cast<double>(mc.n_samples) * cell);
    // omega[k] counts H <= E_k.
    std::vector<double> omega(n, 0.0);
    std::int64_t running = bins[0];
    omega[0] = running * norm;
    for (int k = 1; k < n; ++k) {
        running += bins[k];
        omega[k] = running * norm;
    }
    for (int k = 1; k < n; ++k)  // isotonic safety check on the cumulative curve
        if (omega[k] < omega[k - 1]) omega[k] = omega[k - 1];

    WeylDensity out;
    out.volume = omega;
    out.rho = DensityCurve{grid, std::vector<double>(n, 0.0),
                           SmoothingKernel{SmoothingKernel::Kind::gaussian, 4.0 * h}};
    out.error.assign(n, 0.0);
    auto count_between = [&](int a, int b) {  // samples with E_a < H <= E_b
        std::int64_t s = 0;
        for (int k = std::max(a, -1) + 1; k <= std::min(b, n - 1); ++k)
            s += bins[k == 0 ? 0 : k];
        return s;
    };
    for (int k = 0; k < n; ++k) {
        if (k >= 2 && k + 2 < n) {
            // Five-point smooth differentiator on the cumulative volume.
            out.rho.values[k] = (2.0 * (omega[k + 1] - omega[k - 1]) + omega[k + 2] -
                                 omega[k - 2]) /
                                (8.0 * h);
            double inner = static_cast<double>(count_between(k - 1, k + 1));
            double outer = static_cast<double>(count_between(k - 2, k + 2)) - inner;
            out.error[k] = norm * std::sqrt(9.0 * inner + outer) / (8.0 * h);
        } else {
            int lo = std::max(0, k - 1), hi = std::min(n - 1, k + 1);
            out.rho.values[k] = (omega[hi] - omega[lo]) / ((hi - lo) * h);
            out.error[k] =
                norm * std::sqrt(static_cast<double>(count_between(lo, hi))) /
                ((hi - lo) * h);
        }
    }

    if (mc.max_rel_err > 0.0) {
        double peak = *std::max_element(out.rho.values.begin(), out.rho.values.end());
        std::vector<double> rel;
        for (int k = 0; k < n; ++k)
            if (out.rho.values[k] > 0.1 * peak)
                rel.push_back(out.error[k] / out.rho.values[k]);
        if (!rel.empty()) {
            std::nth_element(rel.begin(), rel.begin() + rel.size() / 2, rel.end());
            if (rel[rel.size() / 2] > mc.max_rel_err)
                throw std::runtime_error(
                    "weyl_density: statistical error above requested tolerance");
        }
    }
    return out;
}

// -------------------------------------------------------- stationary set ----

namespace {

void clamp_to_charts(const ClassicalSystem& sys, std::vector<double>& x) {
    for (int d = 0; d < sys.f; ++d) {
        if (sys.charts[d] != ClassicalSystem::Chart::bloch_disk) continue;
        double& q = x[d];
        double& p = x[d + sys.f];
        double rho = std::sqrt(q * q + p * p);
        double cap = 2.0 * (1.0 - kRimMargin);
        if (rho > cap) {
            q *= cap / rho;
            p *= cap / rho;
        }
    }
}

bool near_rim(const ClassicalSystem& sys, const std::vector<double>& x) {
    for (int d = 0; d < sys.f; ++d)
        if (sys.charts[d] == ClassicalSystem::Chart::bloch_disk &&
            x[d] * x[d] + x[d + sys.f] * x[d + sys.f] > 4.0 * (1.0 - 1e-6))
            return true;
    return false;
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double u : v) s += u * u;
    return std::sqrt(s);
}

}  // namespace

std::vector<StationaryPoint> find_stationary_points(const ClassicalSystem& sys,
                                                    const MultistartOptions& opts) {
    auto box = resolve_box(sys, opts.box);
    int dim = 2 * sys.f;
    CounterRng rng{opts.seed};
    std::vector<StationaryPoint> found;

    for (int s = 0; s < opts.n_seeds; ++s) {
        std::vector<double> x(dim);
        for (int c = 0; c < dim; ++c)
            x[c] = rng.uniform(static_cast<std::uint64_t>(s) * dim + c, box[c].first,
                               box[c].second);
        clamp_to_charts(sys, x);

        bool converged = false;
        std::vector<double> g(dim), dx;
        for (int it = 0; it < opts.max_iter; ++it) {
            sys.gradient(x.data(), g.data());
            double scale = std::max(1.0, std::fabs(sys.energy(x.data())));
            if (norm2(g) < opts.grad_tol * scale) {
                converged = true;
                break;
            }
            auto hess = sys.hessian(x.data());
            std::vector<double> rhs(g);
            for (double& v : rhs) v = -v;
            if (!solve_dense(dim, hess, rhs, dx)) {
                for (int r = 0; r < dim; ++r) hess[r * dim + r] += 1e-6;
                if (!solve_dense(dim, hess, rhs, dx)) break;
            }
            double step = norm2(dx);
            if (step > 0.5)
                for (double& v : dx) v *= 0.5 / step;
            for (int c = 0; c < dim; ++c) x[c] += dx[c];
            clamp_to_charts(sys, x);
        }
        if (!converged) continue;

        StationaryPoint pt;
        pt.x = x;
        pt.energy = sys.energy(x.data());
        auto hess = sys.hessian(x.data());
        SymMatrix hm(dim);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c <= r; ++c) hm.set(r, c, hess[r * dim + c]);
        pt.hessian_eigenvalues = eig::eigenvalues(hm);
        double top = 0.0;
        for (double mu : pt.hessian_eigenvalues) top = std::max(top, std::fabs(mu));
        double degtol = 1e-6 * std::max(top, 1e-300);
        pt.index = 0;
        for (double mu : pt.hessian_eigenvalues) {
            if (mu < -degtol) ++pt.index;
            if (std::fabs(mu) < degtol) pt.degenerate = true;
        }
        pt.on_boundary = near_rim(sys, x);

        auto gc = sys.global_coords(x.data());
        bool duplicate = false;
        for (const auto& other : found) {
            auto oc = sys.global_coords(other.x.data());
            double d2 = 0.0;
            for (std::size_t c = 0; c < gc.size(); ++c)
                d2 += (gc[c] - oc[c]) * (gc[c] - oc[c]);
            if (std::sqrt(d2) < 1e-6) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) found.push_back(std::move(pt));
    }
    std::sort(found.begin(), found.end(),
              [](const StationaryPoint& a, const StationaryPoint& b) {
                  return a.energy < b.energy;
              });
    return found;
}

std::vector<StationaryPoint> find_stationary_points(
    const std::vector<ClassicalSystem>& charts, const MultistartOptions& opts) {
    std::vector<StationaryPoint> merged;
    std::vector<std::vector<double>> merged_gc;
    for (const auto& sys : charts) {
        for (auto& pt : find_stationary_points(sys, opts)) {
            auto gc = sys.global_coords(pt.x.data());
            bool matched = false;
            for (std::size_t i = 0; i < merged.size(); ++i) {
                double d2 = 0.0;
                for (std::size_t c = 0; c < gc.size(); ++c)
                    d2 += (gc[c] - merged_gc[i][c]) * (gc[c] - merged_gc[i][c]);
                if (std::sqrt(d2) < 1e-5) {
                    matched = true;
                    // Prefer the chart where the point is interior.
                    if (merged[i].on_boundary && !pt.on_boundary) {
                        merged[i] = pt;
                        merged_gc[i] = gc;
                    }
                    break;
                }
            }
            if (!matched) {
                merged.push_back(pt);
                merged_gc.push_back(gc);
            }
        }
    }
    std::sort(merged.begin(), merged.end(),
              [](const StationaryPoint& a, const StationaryPoint& b) {
                  return a.energy < b.energy;
              });
    return merged;
}

// --------------------------------------------------------- classification ----

SingularityPrediction classify_formal(int dim, int r) {
    if (dim < 1 || r < 0 || r > dim)
        throw std::invalid_argument("classify_formal: bad index or dimension");
    SingularityPrediction out;
    using Shape = SingularityPrediction::Shape;
    if (dim % 2 == 0) {
        out.derivative_order = dim / 2 - 1;
        if (r % 2 == 0) {
            out.sign = (r / 2) % 2 == 0 ? +1 : -1;
            out.shape = out.sign > 0 ? Shape::step_up : Shape::step_down;
        } else {
            // Negative coefficient of ln|E - Ec| means an upward divergence.
            out.sign = ((r + 1) / 2) % 2 == 0 ? +1 : -1;
            out.shape = out.sign < 0 ? Shape::log_up : Shape::log_down;
        }
    } else {
        out.derivative_order = (dim - 1) / 2;
        if (r % 2 == 0) {
            out.sign = (r / 2) % 2 == 0 ? +1 : -1;
            out.shape = Shape::inv_sqrt_right;
        } else {
            out.sign = ((r - 1) / 2) % 2 == 0 ? +1 : -1;
            out.shape = Shape::inv_sqrt_left;
        }
    }
    return out;
}

SingularityPrediction classify(const StationaryPoint& point, int f) {
    if (point.degenerate || point.on_boundary) {
        SingularityPrediction out;
        out.shape = SingularityPrediction::Shape::unclassified;
        return out;
    }
    return classify_formal(2 * f, point.index);
}

SingularityPrediction classify_degenerate_minimum(const std::vector<int>& K) {
    SingularityPrediction out;
    out.shape = SingularityPrediction::Shape::power_law;
    out.sign = +1;
    out.exponent = -1.0;
    for (int k : K) {
        if (k < 2) throw std::invalid_argument("classify_degenerate_minimum: K_k >= 2");
        out.exponent += 1.0 / k;
    }
    out.derivative_order = 0;
    return out;
}

// -------------------------------------------------------------- couplings ----

DickeCouplings critical_couplings_dicke(double omega, double omega0, double delta) {
    if (omega <= 0.0 || omega0 <= 0.0 || delta < 0.0 || delta > 1.0)
        throw std::invalid_argument("critical_couplings_dicke: bad parameters");
    double base = std::sqrt(omega * omega0);
    return {base / (1.0 + delta),
            delta == 1.0 ? std::numeric_limits<double>::infinity()
                         : base / (1.0 - delta)};
}

// ----------------------------------------------------------- shell average ----

std::vector<double> microcanonical_observable_average(
    const ClassicalSystem& sys, const std::function<double(const double*)>& a,
    const EnergyGrid& grid, const MonteCarlo& mc, double shell_thickness) {
    if (shell_thickness <= 0.0)
        throw std::invalid_argument("shell thickness must be positive");
    auto box = resolve_box(sys, mc.box);
    int dim = 2 * sys.f;
    int n = grid.n_points;
    double h = grid.spacing();
    CounterRng rng{mc.seed};

    constexpr std::int64_t kChunk = 1 << 16;
    std::int64_t n_chunks = (mc.n_samples + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> sums(n_chunks);
    std::vector<std::vector<std::int64_t>> cnts(n_chunks);
#pragma omp parallel for schedule(static)
    for (std::int64_t chunk = 0; chunk < n_chunks; ++chunk) {
        std::vector<double> sum(n, 0.0);
        std::vector<std::int64_t> cnt(n, 0);
        std::vector<double> x(dim);
        std::int64_t end = std::min<std::int64_t>((chunk + 1) * kChunk, mc.n_samples);
        for (std::int64_t t = chunk * kChunk; t < end; ++t) {
            for (int c = 0; c < dim; ++c)
                x[c] = rng.uniform(static_cast<std::uint64_t>(t) * dim + c,
                                   box[c].first, box[c].second);
            if (!sys.in_domain(x.data())) continue;
            double e = sys.energy(x.data());
            int lo = static_cast<int>(std::ceil((e - 0.5 * shell_thickness -
                                                 grid.e_min) / h));
            int hi = static_cast<int>(std::floor((e + 0.5 * shell_thickness -
                                                  grid.e_min) / h));
            lo = std::max(lo, 0);
            hi = std::min(hi, n - 1);
            if (lo > hi) continue;
            double av = a(x.data());
            for (int k = lo; k <= hi; ++k) {
                sum[k] += av;
                cnt[k] += 1;
            }
        }
        sums[chunk] = std::move(sum);
        cnts[chunk] = std::move(cnt);
    }

    std::vector<double> sum(n, 0.0);
    std::vector<std::int64_t> cnt(n, 0);
    for (std::int64_t chunk = 0; chunk < n_chunks; ++chunk)
        for (int k = 0; k < n; ++k) {
            sum[k] += sums[chunk][k];
            cnt[k] += cnts[chunk][k];
        }
    bool any = false;
    std::vector<double> out(n, std::numeric_limits<double>::quiet_NaN());
    for (int k = 0; k < n; ++k)
        if (cnt[k] > 0) {
            out[k] = sum[k] / static_cast<double>(cnt[k]);
            any = true;
        }
    if (!any)
        throw std::runtime_error("microcanonical average: every energy shell is empty");
    return out;
}

}  // namespace esqpt
