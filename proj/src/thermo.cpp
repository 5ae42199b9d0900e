#include "esqpt/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "esqpt/semiclassics.hpp"

namespace esqpt {

// --------------------------------------------------------------- sources ----

ThermalSource discrete_source(const std::vector<double>& levels) {
    if (levels.empty()) throw std::invalid_argument("discrete_source: empty spectrum");
    for (double e : levels)
        if (!std::isfinite(e))
            throw std::invalid_argument("discrete_source: non-finite level");
    return {levels, std::vector<double>(levels.size(), 1.0)};
}

ThermalSource curve_source(const DensityCurve& rho) {
    int n = rho.grid.n_points;
    if (static_cast<int>(rho.values.size()) != n)
        throw std::invalid_argument("curve_source: malformed curve");
    ThermalSource src;
    src.energies.resize(n);
    src.measure.resize(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!(rho.values[i] >= 0.0))
            throw std::invalid_argument("curve_source: negative density");
        src.energies[i] = rho.grid.at(i);
        // Trapezoidal quadrature weight.
        double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        src.measure[i] = rho.values[i] * w * rho.grid.spacing();
        total += src.measure[i];
    }
    if (!(total > 0.0)) throw std::invalid_argument("curve_source: zero density");
    return src;
}

// ----------------------------------------------------------- canonical ----

namespace {

void require_temperature(double t, const char* who) {
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::invalid_argument(std::string(who) + ": temperature must be > 0");
}

}  // namespace

ThermalState canonical(const ThermalSource& source, double t) {
    require_temperature(t, "canonical");
    double e0 = *std::min_element(source.energies.begin(), source.energies.end());
    double z = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < source.energies.size(); ++i) {
        double b = source.measure[i] * std::exp(-(source.energies[i] - e0) / t);
        z += b;
        m1 += b * source.energies[i];
        m2 += b * source.energies[i] * source.energies[i];
    }
    ThermalState st;
    st.temperature = t;
    st.log_z = std::log(z) - e0 / t;
    st.energy = m1 / z;
    st.variance = std::max(m2 / z - st.energy * st.energy, 0.0);
    st.entropy = st.energy / t + st.log_z;
    st.heat_capacity = st.variance / (t * t);
    return st;
}

std::vector<ThermalState> canonical(const ThermalSource& source,
                                    const std::vector<double>& t_grid) {
    std::vector<ThermalState> out(t_grid.size());
#pragma omp parallel for schedule(static)
    for (int k = 0; k < static_cast<int>(t_grid.size()); ++k)
        out[k] = canonical(source, t_grid[k]);
    return out;
}

std::vector<double> thermal_weights(const ThermalSource& source, double t) {
    require_temperature(t, "thermal_weights");
    double e0 = *std::min_element(source.energies.begin(), source.energies.end());
    std::vector<double> p(source.energies.size());
    double z = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = source.measure[i] * std::exp(-(source.energies[i] - e0) / t);
        z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
}

DensityCurve thermal_distribution(const DensityCurve& rho, double t) {
    require_temperature(t, "thermal_distribution");
    ThermalSource src = curve_source(rho);
    ThermalState st = canonical(src, t);
    DensityCurve out = rho;
    for (int i = 0; i < rho.grid.n_points; ++i)
        out.values[i] =
            rho.values[i] * std::exp(-rho.grid.at(i) / t - st.log_z);
    return out;
}

// ------------------------------------------------------- caloric curves ----

CaloricCurve canonical_caloric(const ThermalSource& source,
                               const std::vector<double>& t_grid) {
    auto states = canonical(source, t_grid);
    CaloricBranch br;
    for (const ThermalState& st : states) {
        br.temperature.push_back(st.temperature);
        br.energy.push_back(st.energy);
        br.heat_capacity.push_back(st.heat_capacity);
    }
    return {CaloricCurve::Kind::canonical, {std::move(br)}};
}

// --------------------------------------------- free-energy lambda sweep ----

FreeEnergySweep free_energy_lambda_derivatives(
    const std::vector<SpectrumBundle>& spectra, const std::vector<SymMatrix>& dh,
    double t) {
    require_temperature(t, "free_energy_lambda_derivatives");
    std::size_t n = spectra.size();
    if (dh.size() != n || n < 1)
        throw std::invalid_argument(
            "free_energy_lambda_derivatives: sweep lists do not match");
    double nan = std::numeric_limits<double>::quiet_NaN();
    FreeEnergySweep sweep;
    sweep.lambdas.resize(n);
    sweep.free_energy.resize(n);
    sweep.first.resize(n);
    sweep.second.assign(n, nan);
    std::vector<std::vector<double>> slopes(n);
    for (std::size_t k = 0; k < n; ++k) {
        sweep.lambdas[k] = spectra[k].lambda;
        slopes[k] = level_slopes(spectra[k], dh[k]);
        auto src = discrete_source(spectra[k].eigenvalues());
        sweep.free_energy[k] = canonical(src, t).free_energy();
        auto p = thermal_weights(src, t);
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * slopes[k][i];
        sweep.first[k] = s;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        double h_lo = sweep.lambdas[k] - sweep.lambdas[k - 1];
        double h_hi = sweep.lambdas[k + 1] - sweep.lambdas[k];
        auto p = thermal_weights(discrete_source(spectra[k].eigenvalues()), t);
        double curv_avg = 0.0, s1 = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            double curv = (slopes[k + 1][i] - slopes[k - 1][i]) / (h_lo + h_hi);
            curv_avg += p[i] * curv;
            s1 += p[i] * slopes[k][i];
            s2 += p[i] * slopes[k][i] * slopes[k][i];
        }
        sweep.second[k] = curv_avg - (s2 - s1 * s1) / t;
    }
    return sweep;
}

// -------------------------------------------------------- microcanonical ----

MicrocanonicalCurve microcanonical_temperature(const DensityCurve& rho,
                                               double floor_rel) {
    int n = rho.grid.n_points;
    if (n < 3) throw std::invalid_argument("microcanonical_temperature: tiny grid");
    double peak = *std::max_element(rho.values.begin(), rho.values.end());
    if (!(peak > 0.0))
        throw std::invalid_argument("microcanonical_temperature: zero density");
    double nan = std::numeric_limits<double>::quiet_NaN();
    double h = rho.grid.spacing();
    MicrocanonicalCurve out;
    bool any = false;
    for (int i = 1; i + 1 < n; ++i) {
        out.energy.push_back(rho.grid.at(i));
        if (rho.values[i - 1] < floor_rel * peak || rho.values[i] < floor_rel * peak ||
            rho.values[i + 1] < floor_rel * peak) {
            out.slope.push_back(nan);
            out.temperature.push_back(nan);
            continue;
        }
        double s = (std::log(rho.values[i + 1]) - std::log(rho.values[i - 1])) / (2 * h);
        out.slope.push_back(s);
        out.temperature.push_back(s != 0.0 ? 1.0 / s : nan);
        any = true;
    }
    if (!any)
        throw std::invalid_argument("microcanonical_temperature: zero-density window");
    return out;
}

CaloricCurve microcanonical_caloric(const MicrocanonicalCurve& micro,
                                    const std::vector<double>& t_grid) {
    CaloricCurve curve{CaloricCurve::Kind::microcanonical, {}};
    // Energies of the most recent point of each still-open branch.
    std::vector<int> open;  // indices into curve.branches
    for (double t : t_grid) {
        require_temperature(t, "microcanonical_caloric");
        // Roots of slope(E) = 1/T by linear interpolation between grid points.
        std::vector<double> roots;
        for (std::size_t i = 0; i + 1 < micro.energy.size(); ++i) {
            double a = micro.slope[i] - 1.0 / t;
            double b = micro.slope[i + 1] - 1.0 / t;
            if (std::isnan(a) || std::isnan(b)) continue;
            if (a == 0.0)
                roots.push_back(micro.energy[i]);
            else if (a * b < 0.0)
                roots.push_back(micro.energy[i] +
                                (micro.energy[i + 1] - micro.energy[i]) * a / (a - b));
        }
        // Greedy nearest-energy matching between open branches and roots.
        std::vector<int> next_open;
        std::vector<bool> root_used(roots.size(), false);
        std::vector<bool> branch_used(open.size(), false);
        for (std::size_t pass = 0; pass < std::min(open.size(), roots.size()); ++pass) {
            double best = std::numeric_limits<double>::infinity();
            int bi = -1, bj = -1;
            for (std::size_t i = 0; i < open.size(); ++i) {
                if (branch_used[i]) continue;
                double last = curve.branches[open[i]].energy.back();
                for (std::size_t j = 0; j < roots.size(); ++j) {
                    if (root_used[j]) continue;
                    double d = std::fabs(last - roots[j]);
                    if (d < best) {
                        best = d;
                        bi = static_cast<int>(i);
                        bj = static_cast<int>(j);
                    }
                }
            }
            branch_used[bi] = root_used[bj] = true;
            curve.branches[open[bi]].temperature.push_back(t);
            curve.branches[open[bi]].energy.push_back(roots[bj]);
            next_open.push_back(open[bi]);
        }
        for (std::size_t j = 0; j < roots.size(); ++j) {
            if (root_used[j]) continue;
            curve.branches.push_back(CaloricBranch{{t}, {roots[j]}, {}});
            next_open.push_back(static_cast<int>(curve.branches.size()) - 1);
        }
        open = std::move(next_open);
    }
    // dE/dT along each branch by centered differences.
    double nan = std::numeric_limits<double>::quiet_NaN();
    for (CaloricBranch& br : curve.branches) {
        std::size_t m = br.temperature.size();
        br.heat_capacity.assign(m, nan);
        for (std::size_t k = 0; k < m; ++k) {
            std::size_t lo = k > 0 ? k - 1 : k;
            std::size_t hi = k + 1 < m ? k + 1 : k;
            if (hi == lo) continue;
            br.heat_capacity[k] = (br.energy[hi] - br.energy[lo]) /
                                  (br.temperature[hi] - br.temperature[lo]);
        }
    }
    return curve;
}

DensityCurve smooth_density(const DensityCurve& rho, const SmoothingKernel& kernel) {
    double h = rho.grid.spacing();
    int reach = static_cast<int>(std::ceil(5.0 * kernel.width / h));
    std::vector<double> stencil(2 * reach + 1);
    double norm = 0.0;
    for (int k = -reach; k <= reach; ++k) norm += (stencil[k + reach] = kernel(k * h));
    for (double& v : stencil) v /= norm;
    DensityCurve out = rho;
    out.kernel = kernel;
    int n = rho.grid.n_points;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = -reach; k <= reach; ++k) {
            int j = i + k;
            if (j >= 0 && j < n) s += stencil[k + reach] * rho.values[j];
        }
        out.values[i] = s;
    }
    return out;
}

// ------------------------------------------------- Dicke critical lines ----

CriticalTemperatures dicke_critical_temperatures(double omega, double omega0,
                                                 double lambda, double delta) {
    if (!(omega > 0.0) || !(omega0 > 0.0) || !(lambda > 0.0))
        throw std::invalid_argument(
            "dicke_critical_temperatures: parameters must be positive");
    DickeCouplings cc = critical_couplings_dicke(omega, omega0, delta);
    auto line = [&](double lam_crit) -> std::optional<double> {
        if (!std::isfinite(lam_crit) || lambda <= lam_crit) return std::nullopt;
        double x = lam_crit * lam_crit / (lambda * lambda);
        return omega0 / (2.0 * std::atanh(x));
    };
    return {line(cc.lambda_c), line(cc.lambda_0)};
}

}  // namespace esqpt
