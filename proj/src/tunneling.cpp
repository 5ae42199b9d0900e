#include "esqpt/tunneling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace esqpt {

// ------------------------------------------------------------- potentials ----

PotentialSpec square_barrier(double v0, double width, double mass) {
    if (width <= 0.0) throw std::invalid_argument("square_barrier: width");
    return {[v0, width](double x) { return (x > 0.0 && x < width) ? v0 : 0.0; },
            0.0, width, mass};
}

PotentialSpec eckart_barrier(double v0, double alpha, double mass,
                             double half_range) {
    if (alpha <= 0.0 || half_range <= 0.0)
        throw std::invalid_argument("eckart_barrier: shape parameters");
    return {[v0, alpha](double x) {
                double c = std::cosh(alpha * x);
                return v0 / (c * c);
            },
            -half_range, half_range, mass};
}

PotentialSpec double_barrier(double c0, double c1, double c2, double width_sq,
                             double half_range, double mass) {
    if (width_sq <= 0.0 || half_range <= 0.0)
        throw std::invalid_argument("double_barrier: shape parameters");
    return {[c0, c1, c2, width_sq](double x) {
                return (c0 + c1 * x + c2 * x * x) * std::exp(-x * x / width_sq);
            },
            -half_range, half_range, mass};
}

// -------------------------------------------------------------- scattering ----

namespace {

constexpr double support_tol = 1e-8;

void validate_potential(const PotentialSpec& pot) {
    if (!pot.v) throw std::invalid_argument("potential: missing callable");
    if (!(pot.a < pot.b)) throw std::invalid_argument("potential: empty support");
    if (!(pot.mass > 0.0)) throw std::invalid_argument("potential: mass");
    if (std::fabs(pot.v(pot.a)) > support_tol ||
        std::fabs(pot.v(pot.b)) > support_tol)
        throw std::invalid_argument(
            "potential: V must vanish at the support boundaries");
}

void validate_energies(const std::vector<double>& energies) {
    if (energies.empty()) throw std::invalid_argument("scattering: no energies");
    for (std::size_t i = 0; i < energies.size(); ++i) {
        if (!(energies[i] > 0.0) || !std::isfinite(energies[i]))
            throw std::invalid_argument("scattering: energies must be positive");
        if (i > 0 && !(energies[i] > energies[i - 1]))
            throw std::invalid_argument("scattering: energies must ascend");
    }
}

// One pass of the sliced propagator: each slice applies the exact
// constant-coefficient exponential of the two-point Gauss average of
// (psi, psi')' = [[0, 1], [q, 0]] (psi, psi'), which is fourth order in the
// slice width and exact wherever V is slicewise constant.
void propagate(const PotentialSpec& pot, double e, int n_slices, cplx& alpha,
               cplx& beta) {
    double m = pot.mass;
    double k = std::sqrt(2.0 * m * e);
    double h = (pot.b - pot.a) / n_slices;
    double hh = -h;  // integrating from b down to a
    double gauss = std::sqrt(3.0) / 6.0;
    cplx psi = std::polar(1.0, k * pot.b);
    cplx dpsi = cplx{0.0, k} * psi;
    for (int i = 0; i < n_slices; ++i) {
        double xr = pot.b - i * h;
        double q1 = 2.0 * m * (pot.v(xr - h * (0.5 - gauss)) - e);
        double q2 = 2.0 * m * (pot.v(xr - h * (0.5 + gauss)) - e);
        double d = std::sqrt(3.0) * hh * hh * (q1 - q2) / 12.0;
        double qb = 0.5 * (q1 + q2);
        double s2 = d * d + hh * hh * qb;
        double c, sn;
        if (s2 >= 0.0) {
            double s = std::sqrt(s2);
            c = std::cosh(s);
            sn = s > 0.0 ? std::sinh(s) / s : 1.0;
        } else {
            double s = std::sqrt(-s2);
            c = std::cos(s);
            sn = std::sin(s) / s;
        }
        cplx psi_new = (c + sn * d) * psi + sn * hh * dpsi;
        dpsi = sn * hh * qb * psi + (c - sn * d) * dpsi;
        psi = psi_new;
    }
    cplx ik{0.0, k};
    cplx a_plus = 0.5 * (psi + dpsi / ik) * std::polar(1.0, -k * pot.a);
    cplx a_minus = 0.5 * (psi - dpsi / ik) * std::polar(1.0, k * pot.a);
    beta = 1.0 / a_plus;
    alpha = a_minus / a_plus;
}

// Amplitudes for every energy; the phase holds the principal argument (real)
// and the attenuation -ln|beta| (imag), to be unwrapped once the grid is final.
std::vector<ScatteringResult> compute_amplitudes(const PotentialSpec& pot,
                                                 const std::vector<double>& energies,
                                                 double tol) {
    std::vector<ScatteringResult> results(energies.size());
    bool failed = false;
#pragma omp parallel for schedule(dynamic, 8)
    for (std::size_t i = 0; i < energies.size(); ++i) {
        double e = energies[i];
        cplx alpha, beta, alpha_prev, beta_prev;
        int n = 1500;
        propagate(pot, e, n, alpha_prev, beta_prev);
        bool converged = false;
        while (n <= (1 << 20)) {
            n *= 2;
            propagate(pot, e, n, alpha, beta);
            if (std::abs(beta - beta_prev) <= tol &&
                std::abs(alpha - alpha_prev) <= tol) {
                converged = true;
                break;
            }
            alpha_prev = alpha;
            beta_prev = beta;
        }
        if (!converged) {
            failed = true;
            continue;
        }
        results[i] = {e, alpha, beta,
                      cplx{std::arg(beta), -std::log(std::abs(beta))}, cplx{}};
    }
    if (failed)
        throw std::runtime_error("transmit: slice refinement did not converge");
    return results;
}

double reduce_angle(double d) {
    double two_pi = 2.0 * std::numbers::pi;
    d = std::fmod(d, two_pi);
    if (d > std::numbers::pi) d -= two_pi;
    if (d <= -std::numbers::pi) d += two_pi;
    return d;
}

void unwrap_chain(std::vector<ScatteringResult>& results) {
    for (std::size_t i = 1; i < results.size(); ++i) {
        double prev = results[i - 1].phase.real();
        double step = reduce_angle(results[i].phase.real() - prev);
        results[i].phase = cplx{prev + step, results[i].phase.imag()};
    }
}

}  // namespace

std::vector<ScatteringResult> transmit(const PotentialSpec& pot,
                                       const std::vector<double>& energies,
                                       double tol) {
    validate_potential(pot);
    validate_energies(energies);
    auto results = compute_amplitudes(pot, energies, tol);
    unwrap_chain(results);
    return results;
}

std::vector<ScatteringResult> transmit_refined(const PotentialSpec& pot,
                                               const std::vector<double>& energies,
                                               double jump_tol, int max_rounds,
                                               double tol) {
    validate_potential(pot);
    validate_energies(energies);
    if (jump_tol <= 0.0) throw std::invalid_argument("transmit_refined: jump_tol");
    auto results = compute_amplitudes(pot, energies, tol);
    for (int round = 0; round < max_rounds; ++round) {
        std::vector<double> added;
        for (std::size_t i = 1; i < results.size(); ++i) {
            double jump = reduce_angle(results[i].phase.real() -
                                       results[i - 1].phase.real());
            double lo = results[i - 1].energy, hi = results[i].energy;
            if (std::fabs(jump) > jump_tol && hi - lo > 1e-12 * hi)
                added.push_back(0.5 * (lo + hi));
        }
        if (added.empty()) break;
        auto extra = compute_amplitudes(pot, added, tol);
        std::vector<ScatteringResult> merged;
        merged.reserve(results.size() + extra.size());
        std::merge(results.begin(), results.end(), extra.begin(), extra.end(),
                   std::back_inserter(merged),
                   [](const ScatteringResult& x, const ScatteringResult& y) {
                       return x.energy < y.energy;
                   });
        results = std::move(merged);
    }
    unwrap_chain(results);
    return results;
}

DelayCurve complex_time_delay(std::vector<ScatteringResult>& results,
                              double hbar) {
    if (results.size() < 3)
        throw std::invalid_argument("complex_time_delay: need at least 3 points");
    if (!(hbar > 0.0)) throw std::invalid_argument("complex_time_delay: hbar");
    constexpr double unwrap_guard = 2.8;  // close to pi; beyond it the
                                          // unwrapped branch is unreliable
    std::size_t n = results.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (std::fabs(results[i].phase.real() - results[i - 1].phase.real()) >
            unwrap_guard)
            throw std::runtime_error(
                "complex_time_delay: phase jump exceeds the unwrap guard, "
                "refine the energy grid near E = " +
                std::to_string(results[i].energy));
    }
    DelayCurve curve;
    curve.energy.resize(n);
    curve.delay.resize(n);
    curve.density.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t lo = i > 0 ? i - 1 : 0;
        std::size_t hi = i + 1 < n ? i + 1 : n - 1;
        cplx dphi = (results[hi].phase - results[lo].phase) /
                    (results[hi].energy - results[lo].energy);
        // Conjugated so that growing attenuation toward lower energy counts
        // the forbidden-region time with a positive sign.
        cplx delay = hbar * std::conj(dphi);
        results[i].delay = delay;
        curve.energy[i] = results[i].energy;
        curve.delay[i] = delay;
        curve.density[i] = delay / (std::numbers::pi * hbar);
    }
    return curve;
}

// ------------------------------------------------------------ classical times ----

namespace {

// Composite Simpson rule on [0, len].
template <typename F>
double simpson(F&& f, double len, int panels) {
    double h = len / panels;
    double sum = f(0.0) + f(len);
    for (int i = 1; i < panels; ++i)
        sum += f(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

// Time integral over one classically uniform region [lo, hi]; turning-point
// endpoints carry an inverse-square-root singularity removed by the
// substitution x = turning_point +- u^2.
double region_time(const PotentialSpec& pot, double e, double lo, double hi,
                   bool lo_turning, bool hi_turning) {
    double m = pot.mass;
    auto speed_time = [&](double x) {
        double d = std::fabs(e - pot.v(x));
        return std::sqrt(m / (2.0 * std::max(d, 1e-300)));
    };
    double mid = 0.5 * (lo + hi);
    constexpr int panels = 2048;
    double total = 0.0;
    auto half = [&](double edge, double inner) {
        double len = std::fabs(inner - edge);
        if (len == 0.0) return 0.0;
        double sign = inner > edge ? 1.0 : -1.0;
        double u_max = std::sqrt(len);
        auto g = [&](double u) {
            double x = edge + sign * u * u;
            double d = std::fabs(e - pot.v(x));
            if (d < 1e-14) {
                // Limit 2 sqrt(m / (2 |V'|)) at the turning point itself.
                double fd = 1e-6 * (std::fabs(edge) + 1.0);
                double dv = std::fabs(pot.v(edge + fd) - pot.v(edge - fd)) /
                            (2.0 * fd);
                return 2.0 * std::sqrt(m / (2.0 * std::max(dv, 1e-300)));
            }
            return 2.0 * u * std::sqrt(m / (2.0 * d));
        };
        return simpson(g, u_max, panels);
    };
    if (lo_turning)
        total += half(lo, mid);
    else
        total += simpson([&](double u) { return speed_time(lo + u); }, mid - lo,
                         panels);
    if (hi_turning)
        total += half(hi, mid);
    else
        total += simpson([&](double u) { return speed_time(mid + u); }, hi - mid,
                         panels);
    return total;
}

}  // namespace

WkbTimes wkb_times(const PotentialSpec& pot, const std::vector<double>& energies) {
    validate_potential(pot);
    validate_energies(energies);
    WkbTimes times;
    std::size_t n = energies.size();
    times.energy = energies;
    times.allowed_shift.resize(n);
    times.forbidden.resize(n);
    constexpr int n_scan = 8192;
    double h_scan = (pot.b - pot.a) / n_scan;
    bool failed = false;
#pragma omp parallel for schedule(dynamic, 4)
    for (std::size_t idx = 0; idx < n; ++idx) {
        double e = energies[idx];
        auto g = [&](double x) { return pot.v(x) - e; };
        // Bracketed turning points on the scan grid, polished by bisection.
        std::vector<double> roots;
        double g_prev = g(pot.a);
        for (int i = 1; i <= n_scan; ++i) {
            double x = pot.a + i * h_scan;
            double g_cur = g(x);
            if ((g_prev < 0.0) != (g_cur < 0.0)) {
                double lo = x - h_scan, hi = x;
                for (int it = 0; it < 100; ++it) {
                    double mid = 0.5 * (lo + hi);
                    if ((g(mid) < 0.0) == (g_prev < 0.0))
                        lo = mid;
                    else
                        hi = mid;
                }
                roots.push_back(0.5 * (lo + hi));
            }
            g_prev = g_cur;
        }
        if (roots.size() % 2 != 0) {  // V < E at both vanishing ends
            failed = true;
            continue;
        }
        double t_plus = 0.0, t_minus = 0.0;
        std::vector<double> pts;
        pts.push_back(pot.a);
        pts.insert(pts.end(), roots.begin(), roots.end());
        pts.push_back(pot.b);
        for (std::size_t r = 0; r + 1 < pts.size(); ++r) {
            double lo = pts[r], hi = pts[r + 1];
            if (hi - lo <= 0.0) continue;
            bool lo_turning = r > 0;
            bool hi_turning = r + 2 < pts.size();
            double t = region_time(pot, e, lo, hi, lo_turning, hi_turning);
            if (pot.v(0.5 * (lo + hi)) > e)
                t_minus += t;
            else
                t_plus += t;
        }
        double t_zero = (pot.b - pot.a) * std::sqrt(pot.mass / (2.0 * e));
        times.allowed_shift[idx] = t_plus - t_zero;
        times.forbidden[idx] = t_minus;
    }
    if (failed)
        throw std::runtime_error("wkb_times: turning-point bracketing failed");
    return times;
}

}  // namespace esqpt
