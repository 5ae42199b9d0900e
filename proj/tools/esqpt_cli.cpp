// Command-line front end: JSON-configured runs of the analysis modules with
// CSV/JSON emission and a deterministic run manifest.  Units: hbar = k_B = 1.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "esqpt/lattice.hpp"
#include "esqpt/models.hpp"
#include "esqpt/quench.hpp"
#include "esqpt/semiclassics.hpp"
#include "esqpt/spectral.hpp"
#include "esqpt/thermo.hpp"
#include "esqpt/tunneling.hpp"

using esqpt::EnergyGrid;
using esqpt::ModelSpec;
using esqpt::SmoothingKernel;
using esqpt::SymMatrix;
using json = nlohmann::json;

namespace {

// ------------------------------------------------------------ validation ----

// Config problems exit with status 2; computation failures with status 1.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check_keys(const json& j, const std::string& path,
                const std::set<std::string>& allowed) {
    if (!j.is_object()) throw SchemaError(path + ": expected an object");
    for (const auto& item : j.items())
        if (!allowed.count(item.key()))
            throw SchemaError(path + "." + item.key() + ": unknown key");
}

const json& need(const json& j, const std::string& path, const std::string& key) {
    if (!j.is_object() || !j.contains(key))
        throw SchemaError(path + "." + key + ": missing");
    return j.at(key);
}

double num(const json& j, const std::string& path, const std::string& key) {
    const json& v = need(j, path, key);
    if (!v.is_number()) throw SchemaError(path + "." + key + ": expected a number");
    return v.get<double>();
}

double num_or(const json& j, const std::string& path, const std::string& key,
              double fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return num(j, path, key);
}

long long integer(const json& j, const std::string& path, const std::string& key) {
    const json& v = need(j, path, key);
    if (!v.is_number_integer())
        throw SchemaError(path + "." + key + ": expected an integer");
    return v.get<long long>();
}

std::string text(const json& j, const std::string& path, const std::string& key) {
    const json& v = need(j, path, key);
    if (!v.is_string()) throw SchemaError(path + "." + key + ": expected a string");
    return v.get<std::string>();
}

json load_config(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw SchemaError("cannot open config file " + file);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string body = buf.str();
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < body.size(); ++i)
            if (body[i] == '\n') ++line;
        throw SchemaError(file + ":" + std::to_string(line) + ": " + e.what());
    }
}

// ---------------------------------------------------------------- output ----

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

struct OutputWriter {
    std::filesystem::path dir;
    json outputs = json::array();

    void write_text(const std::string& name, const std::string& body) {
        std::filesystem::create_directories(dir);
        std::ofstream out(dir / name, std::ios::binary);
        out << body;
        if (!out) throw std::runtime_error("cannot write " + name);
        char sum[20];
        std::snprintf(sum, sizeof sum, "%016llx",
                      static_cast<unsigned long long>(fnv1a(body)));
        outputs.push_back({{"file", name}, {"fnv1a64", sum}});
    }

    void write_csv(const std::string& name, const std::vector<std::string>& cols,
                   const std::vector<std::vector<double>>& rows) {
        std::string body = "# units: hbar = k_B = 1\n";
        for (std::size_t c = 0; c < cols.size(); ++c)
            body += (c ? "," : "") + cols[c];
        body += "\n";
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c)
                body += (c ? "," : "") + format_value(row[c]);
            body += "\n";
        }
        write_text(name, body);
    }
};

// ---------------------------------------------------------------- models ----

struct BuiltModel {
    SymMatrix h;
    ModelSpec spec;
    double lambda = 0.0;
    std::string type;
    json derived = json::object();
};

BuiltModel build_model(const json& m, const std::string& path) {
    std::string type = text(m, path, "type");
    if (type == "lipkin") {
        check_keys(m, path, {"type", "N", "lambda", "chi"});
        esqpt::Lipkin spec{static_cast<int>(integer(m, path, "N")),
                           num(m, path, "lambda"), num_or(m, path, "chi", 0.0)};
        return {esqpt::build_lipkin(spec), spec, spec.lambda, type, {}};
    }
    if (type == "dicke") {
        check_keys(m, path,
                   {"type", "N", "omega", "omega0", "lambda", "delta", "n_max"});
        esqpt::ExtendedDicke spec;
        spec.N = static_cast<int>(integer(m, path, "N"));
        spec.omega = num_or(m, path, "omega", 1.0);
        spec.omega0 = num_or(m, path, "omega0", 1.0);
        spec.lambda = num(m, path, "lambda");
        spec.delta = num(m, path, "delta");
        json derived = json::object();
        if (m.contains("n_max")) {
            spec.n_max = static_cast<int>(integer(m, path, "n_max"));
        } else {
            spec.n_max = esqpt::converged_n_max(spec, spec.N + 1);
            derived["n_max"] = spec.n_max;
        }
        return {esqpt::build_dicke(spec), spec, spec.lambda, type, derived};
    }
    if (type == "tavis_cummings") {
        check_keys(m, path, {"type", "N", "omega", "omega0", "lambda", "M"});
        esqpt::TavisCummingsBlock spec;
        spec.N = static_cast<int>(integer(m, path, "N"));
        spec.omega = num_or(m, path, "omega", 1.0);
        spec.omega0 = num_or(m, path, "omega0", 1.0);
        spec.lambda = num(m, path, "lambda");
        spec.M = static_cast<int>(integer(m, path, "M"));
        return {esqpt::build_tc_block(spec), spec, spec.lambda, type, {}};
    }
    if (type == "two_site") {
        check_keys(m, path, {"type", "N", "eps_plus", "eps_minus", "tau", "U"});
        esqpt::TwoSiteBoseHubbard spec;
        spec.N = static_cast<int>(integer(m, path, "N"));
        spec.eps_plus = num_or(m, path, "eps_plus", 0.0);
        spec.eps_minus = num_or(m, path, "eps_minus", 0.0);
        spec.tau = num(m, path, "tau");
        spec.U = num_or(m, path, "U", 0.0);
        return {esqpt::build_two_site(spec), spec, spec.tau, type, {}};
    }
    if (type == "chain") {
        check_keys(m, path, {"type", "n_sites", "n_bosons", "eps", "tau", "U"});
        esqpt::BoseHubbardChain spec;
        spec.n_sites = static_cast<int>(integer(m, path, "n_sites"));
        spec.n_bosons = static_cast<int>(integer(m, path, "n_bosons"));
        spec.eps = num_or(m, path, "eps", 0.0);
        spec.tau = num(m, path, "tau");
        spec.U = num_or(m, path, "U", 0.0);
        return {esqpt::build_chain(spec), spec, spec.U, type, {}};
    }
    throw SchemaError(path + ".type: unknown model '" + type + "'");
}

SmoothingKernel parse_kernel(const json& cfg, const std::string& path,
                             const std::vector<double>& levels) {
    if (!cfg.contains("kernel")) return esqpt::default_kernel(levels);
    const json& k = cfg.at("kernel");
    check_keys(k, path + ".kernel", {"type", "width"});
    std::string type = k.contains("type") ? text(k, path + ".kernel", "type")
                                          : std::string("gaussian");
    double width = num(k, path + ".kernel", "width");
    if (type == "gaussian") return SmoothingKernel::gaussian(width);
    if (type == "cauchy") return SmoothingKernel::cauchy(width);
    throw SchemaError(path + ".kernel.type: unknown kernel '" + type + "'");
}

EnergyGrid parse_grid(const json& parent, const std::string& path,
                      const std::string& key) {
    const json& g = need(parent, path, key);
    check_keys(g, path + "." + key, {"e_min", "e_max", "n_points"});
    EnergyGrid grid{num(g, path + "." + key, "e_min"),
                    num(g, path + "." + key, "e_max"),
                    static_cast<int>(integer(g, path + "." + key, "n_points"))};
    if (!(grid.e_min < grid.e_max) || grid.n_points < 2)
        throw SchemaError(path + "." + key + ": degenerate grid");
    return grid;
}

EnergyGrid grid_or_auto(const json& cfg, const std::string& path,
                        const std::vector<double>& levels,
                        const SmoothingKernel& kernel) {
    if (cfg.contains("grid")) return parse_grid(cfg, path, "grid");
    return esqpt::auto_grid(levels, kernel);
}

std::uint64_t required_seed(const json& j, const std::string& path,
                            const std::optional<std::uint64_t>& override_seed) {
    if (override_seed) return *override_seed;
    if (!j.is_object() || !j.contains("seed"))
        throw SchemaError(path + ".seed: missing (mandatory for stochastic runs)");
    const json& v = j.at("seed");
    if (!v.is_number_unsigned() && !v.is_number_integer())
        throw SchemaError(path + ".seed: expected an integer");
    return v.get<std::uint64_t>();
}

std::vector<std::pair<double, double>> parse_box(const json& j,
                                                 const std::string& path) {
    if (!j.is_array()) throw SchemaError(path + ": expected [[lo, hi], ...]");
    std::vector<std::pair<double, double>> box;
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2)
            throw SchemaError(path + ": expected [[lo, hi], ...]");
        box.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
    }
    return box;
}

const char* shape_name(esqpt::SingularityPrediction::Shape s) {
    using Shape = esqpt::SingularityPrediction::Shape;
    switch (s) {
        case Shape::step_up: return "step_up";
        case Shape::step_down: return "step_down";
        case Shape::log_up: return "log_up";
        case Shape::log_down: return "log_down";
        case Shape::inv_sqrt_right: return "inv_sqrt_right";
        case Shape::inv_sqrt_left: return "inv_sqrt_left";
        case Shape::power_law: return "power_law";
        default: return "unclassified";
    }
}

// ----------------------------------------------------------- subcommands ----

json run_spectrum(const json& cfg, OutputWriter& out) {
    check_keys(cfg, "config", {"model"});
    auto model = build_model(need(cfg, "config", "model"), "config.model");
    auto bundle = esqpt::solve(model.h, model.spec, model.lambda);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < bundle.dim(); ++i)
        rows.push_back({static_cast<double>(i), bundle.eigenvalues()[i]});
    out.write_csv("spectrum.csv", {"index", "E"}, rows);
    return model.derived;
}

json run_density(const json& cfg, OutputWriter& out) {
    check_keys(cfg, "config", {"model", "kernel", "grid"});
    auto model = build_model(need(cfg, "config", "model"), "config.model");
    auto bundle = esqpt::solve(model.h, model.spec, model.lambda);
    auto kernel = parse_kernel(cfg, "config", bundle.eigenvalues());
    auto grid = grid_or_auto(cfg, "config", bundle.eigenvalues(), kernel);
    auto rho = esqpt::smoothed_level_density(bundle, kernel, grid);
    auto drho = rho.derivative();
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < grid.n_points; ++i)
        rows.push_back({grid.at(i), rho.values[i], drho.values[i]});
    out.write_csv("density.csv", {"E", "rho", "drho_dE"}, rows);
    json derived = model.derived;
    derived["kernel_width"] = kernel.width;
    return derived;
}

json run_peres(const json& cfg, OutputWriter& out) {
    check_keys(cfg, "config", {"model", "observable"});
    const json& m = need(cfg, "config", "model");
    auto model = build_model(m, "config.model");
    if (model.type != "lipkin")
        throw SchemaError("config.observable: only quasispin observables of the "
                          "lipkin model are supported");
    std::string name = text(cfg, "config", "observable");
    auto basis = esqpt::QuasispinBasis::from_two_j(
        static_cast<int>(integer(m, "config.model", "N")));
    auto ops = esqpt::build_quasispin_ops(basis);
    const SymMatrix* a = nullptr;
    if (name == "jz") a = &ops.jz;
    else if (name == "jx") a = &ops.jx;
    else throw SchemaError("config.observable: unknown observable '" + name + "'");
    auto bundle = esqpt::solve(model.h, model.spec, model.lambda);
    auto lattice = esqpt::peres_lattice(bundle, *a, name);
    std::vector<std::vector<double>> rows;
    for (const auto& [e, v] : lattice.points) rows.push_back({e, v});
    out.write_csv("peres.csv", {"E", name}, rows);
    return model.derived;
}

json run_flow(const json& cfg, OutputWriter& out) {
    check_keys(cfg, "config", {"model", "kernel", "grid"});
    const json& m = need(cfg, "config", "model");
    auto model = build_model(m, "config.model");
    SymMatrix dh{1};
    if (auto* lip = std::get_if<esqpt::Lipkin>(&model.spec))
        dh = esqpt::lipkin_dH_dlambda(*lip);
    else if (auto* dic = std::get_if<esqpt::ExtendedDicke>(&model.spec))
        dh = esqpt::dicke_dH_dlambda(*dic);
    else
        throw SchemaError("config.model.type: flow needs a lambda-differentiable "
                          "model (lipkin or dicke)");
    auto bundle = esqpt::solve(model.h, model.spec, model.lambda);
    auto kernel = parse_kernel(cfg, "config", bundle.eigenvalues());
    auto grid = grid_or_auto(cfg, "config", bundle.eigenvalues(), kernel);
    auto rho = esqpt::smoothed_level_density(bundle, kernel, grid);
    auto flow = esqpt::smoothed_flow(bundle, dh, kernel, grid);
    auto rate = esqpt::flow_rate(flow, rho);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < grid.n_points; ++i)
        rows.push_back({grid.at(i), rho.values[i], flow.values[i], rate[i]});
    out.write_csv("flow.csv", {"E", "rho", "flow", "flow_rate"}, rows);
    json derived = model.derived;
    derived["kernel_width"] = kernel.width;
    return derived;
}

json run_semiclassics(const json& cfg, OutputWriter& out,
                      const std::optional<std::uint64_t>& seed) {
    check_keys(cfg, "config", {"model", "hbar", "multistart", "weyl"});
    const json& m = need(cfg, "config", "model");
    std::string type = text(m, "config.model", "type");
    double hbar = num_or(cfg, "config", "hbar", 1.0);
    std::vector<esqpt::ClassicalSystem> charts;
    int f = 1;
    if (type == "lipkin") {
        check_keys(m, "config.model", {"type", "lambda", "chi", "N"});
        double lambda = num(m, "config.model", "lambda");
        double chi = num_or(m, "config.model", "chi", 0.0);
        charts.push_back(esqpt::classical_lipkin(lambda, chi, hbar, false));
        charts.push_back(esqpt::classical_lipkin(lambda, chi, hbar, true));
    } else if (type == "dicke") {
        check_keys(m, "config.model",
                   {"type", "omega", "omega0", "lambda", "delta", "N"});
        double omega = num_or(m, "config.model", "omega", 1.0);
        double omega0 = num_or(m, "config.model", "omega0", 1.0);
        double lambda = num(m, "config.model", "lambda");
        double delta = num(m, "config.model", "delta");
        charts.push_back(
            esqpt::classical_dicke(omega, omega0, lambda, delta, hbar, hbar, false));
        charts.push_back(
            esqpt::classical_dicke(omega, omega0, lambda, delta, hbar, hbar, true));
        f = 2;
    } else if (type == "custom") {
        check_keys(m, "config.model", {"type", "f", "mass", "terms"});
        esqpt::CustomPotential pot;
        pot.f = static_cast<int>(integer(m, "config.model", "f"));
        pot.mass = num_or(m, "config.model", "mass", 1.0);
        const json& terms = need(m, "config.model", "terms");
        if (!terms.is_array())
            throw SchemaError("config.model.terms: expected an array");
        for (const auto& t : terms) {
            check_keys(t, "config.model.terms[]", {"coeff", "powers"});
            esqpt::PolynomialTerm term;
            term.coeff = num(t, "config.model.terms[]", "coeff");
            for (const auto& p : need(t, "config.model.terms[]", "powers"))
                term.powers.push_back(p.get<int>());
            pot.terms.push_back(term);
        }
        charts.push_back(esqpt::classical_custom(pot, hbar));
        f = pot.f;
    } else {
        throw SchemaError("config.model.type: no classical limit for '" + type + "'");
    }

    const json& ms = need(cfg, "config", "multistart");
    check_keys(ms, "config.multistart", {"n_seeds", "seed", "max_iter", "box"});
    esqpt::MultistartOptions opts;
    opts.n_seeds = static_cast<int>(integer(ms, "config.multistart", "n_seeds"));
    opts.seed = required_seed(ms, "config.multistart", seed);
    if (ms.contains("max_iter"))
        opts.max_iter = static_cast<int>(integer(ms, "config.multistart", "max_iter"));
    if (ms.contains("box"))
        opts.box = parse_box(ms.at("box"), "config.multistart.box");
    auto points = esqpt::find_stationary_points(charts, opts);

    json report = json::array();
    for (const auto& p : points) {
        auto pred = esqpt::classify(p, f);
        report.push_back({{"x", p.x},
                          {"energy", p.energy},
                          {"index", p.index},
                          {"degenerate", p.degenerate},
                          {"on_boundary", p.on_boundary},
                          {"shape", shape_name(pred.shape)},
                          {"derivative_order", pred.derivative_order},
                          {"sign", pred.sign}});
    }
    out.write_text("stationary_points.json", report.dump(2) + "\n");

    json derived{{"n_stationary_points", points.size()}};
    if (cfg.contains("weyl")) {
        const json& w = cfg.at("weyl");
        check_keys(w, "config.weyl", {"grid", "n_samples", "seed", "box"});
        esqpt::MonteCarlo mc;
        mc.n_samples = integer(w, "config.weyl", "n_samples");
        mc.seed = required_seed(w, "config.weyl", seed);
        if (w.contains("box")) mc.box = parse_box(w.at("box"), "config.weyl.box");
        auto grid = parse_grid(w, "config.weyl", "grid");
        auto weyl = esqpt::weyl_density(charts.front(), grid, mc);
        std::vector<std::vector<double>> rows;
        for (int i = 0; i < grid.n_points; ++i)
            rows.push_back({grid.at(i), weyl.rho.values[i], weyl.error[i],
                            weyl.volume[i]});
        out.write_csv("weyl.csv", {"E", "rho", "rho_err", "volume"}, rows);
        derived["weyl_seed"] = mc.seed;
    }
    return derived;
}

json run_quench(const json& cfg, OutputWriter& out) {
    check_keys(cfg, "config",
               {"model", "lambda_initial", "lambda_final", "initial_index",
                "times", "kernel"});
    json m = need(cfg, "config", "model");
    if (m.contains("lambda"))
        throw SchemaError("config.model.lambda: use lambda_initial/lambda_final");
    json m0 = m, m1 = m;
    m0["lambda"] = num(cfg, "config", "lambda_initial");
    m1["lambda"] = num(cfg, "config", "lambda_final");
    auto initial = build_model(m0, "config.model");
    auto final_model = build_model(m1, "config.model");
    int index = 0;
    if (cfg.contains("initial_index"))
        index = static_cast<int>(integer(cfg, "config", "initial_index"));
    auto setup = esqpt::make_quench(
        esqpt::solve(initial.h, initial.spec, initial.lambda),
        esqpt::solve(final_model.h, final_model.spec, final_model.lambda), index);
    auto set = esqpt::overlaps(setup);

    const json& t = need(cfg, "config", "times");
    check_keys(t, "config.times", {"t_min", "t_max", "n_points"});
    auto times = esqpt::linear_times(
        num(t, "config.times", "t_max"),
        static_cast<int>(integer(t, "config.times", "n_points")),
        num_or(t, "config.times", "t_min", 0.0));
    auto p = esqpt::survival_probability(set, times);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < times.size(); ++i)
        rows.push_back({times[i], p[i]});
    out.write_csv("survival.csv", {"t", "P"}, rows);

    rows.clear();
    for (std::size_t i = 0; i < set.weights.size(); ++i)
        rows.push_back({set.energies[i], set.weights[i]});
    out.write_csv("overlaps.csv", {"E", "w"}, rows);

    json derived = initial.derived;
    derived["mean_energy"] = set.mean();
    derived["energy_variance"] = set.variance();
    derived["long_time_average"] = set.long_time_average();
    derived["participation_ratio"] = set.participation_ratio();
    return derived;
}

json run_thermo(const json& cfg, OutputWriter& out) {
    check_keys(cfg, "config", {"model", "temperatures"});
    auto model = build_model(need(cfg, "config", "model"), "config.model");
    auto bundle = esqpt::solve(model.h, model.spec, model.lambda);
    auto source = esqpt::discrete_source(bundle.eigenvalues());
    const json& t = need(cfg, "config", "temperatures");
    check_keys(t, "config.temperatures", {"t_min", "t_max", "n_points"});
    double t_min = num(t, "config.temperatures", "t_min");
    double t_max = num(t, "config.temperatures", "t_max");
    int n = static_cast<int>(integer(t, "config.temperatures", "n_points"));
    if (!(t_min > 0.0) || !(t_max > t_min) || n < 2)
        throw SchemaError("config.temperatures: need 0 < t_min < t_max, n >= 2");
    std::vector<double> t_grid(n);
    for (int i = 0; i < n; ++i)
        t_grid[i] = t_min + (t_max - t_min) * i / (n - 1);
    auto states = esqpt::canonical(source, t_grid);
    std::vector<std::vector<double>> rows;
    for (const auto& s : states)
        rows.push_back({s.temperature, s.energy, s.variance, s.heat_capacity,
                        s.entropy, s.free_energy()});
    out.write_csv("thermo.csv", {"T", "E", "Var_E", "C", "S", "F"}, rows);
    return model.derived;
}

json run_lattice(const json& cfg, OutputWriter& out,
                 const std::optional<std::uint64_t>& seed) {
    check_keys(cfg, "config", {"dispersion", "grid", "k_points", "mc"});
    const json& d = need(cfg, "config", "dispersion");
    check_keys(d, "config.dispersion", {"eps", "tau", "n"});
    esqpt::DispersionSpec spec{num_or(d, "config.dispersion", "eps", 0.0),
                               num(d, "config.dispersion", "tau"),
                               static_cast<int>(integer(d, "config.dispersion", "n"))};
    auto grid = parse_grid(cfg, "config", "grid");
    esqpt::DensityCurve dos{grid, {}, SmoothingKernel::gaussian(1.0)};
    json derived = json::object();
    if (cfg.contains("mc")) {
        const json& mc = cfg.at("mc");
        check_keys(mc, "config.mc", {"n_samples", "seed"});
        std::uint64_t s = required_seed(mc, "config.mc", seed);
        dos = esqpt::dos_from_dispersion_mc(spec, grid,
                                            integer(mc, "config.mc", "n_samples"), s);
        derived["seed"] = s;
    } else {
        int k_points = 2000;
        if (cfg.contains("k_points"))
            k_points = static_cast<int>(integer(cfg, "config", "k_points"));
        dos = esqpt::dos_from_dispersion(spec, grid, k_points);
    }
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < grid.n_points; ++i)
        rows.push_back({grid.at(i), dos.values[i]});
    out.write_csv("lattice.csv", {"E", "rho"}, rows);
    return derived;
}

json run_tunnel(const json& cfg, OutputWriter& out) {
    check_keys(cfg, "config", {"potential", "energies"});
    const json& p = need(cfg, "config", "potential");
    check_keys(p, "config.potential",
               {"comment", "c0", "c1", "c2", "width_sq", "support", "mass"});
    const json& support = need(p, "config.potential", "support");
    if (!support.is_array() || support.size() != 2)
        throw SchemaError("config.potential.support: expected [a, b]");
    double a = support.at(0).get<double>(), b = support.at(1).get<double>();
    if (a != -b) throw SchemaError("config.potential.support: must be symmetric");
    auto pot = esqpt::double_barrier(
        num(p, "config.potential", "c0"), num(p, "config.potential", "c1"),
        num(p, "config.potential", "c2"), num(p, "config.potential", "width_sq"),
        b, num_or(p, "config.potential", "mass", 1.0));

    auto grid = parse_grid(cfg, "config", "energies");
    std::vector<double> energies(grid.n_points);
    for (int i = 0; i < grid.n_points; ++i) energies[i] = grid.at(i);
    auto results = esqpt::transmit_refined(pot, energies);
    auto curve = esqpt::complex_time_delay(results);
    auto times = esqpt::wkb_times(pot, curve.energy);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < results.size(); ++i)
        rows.push_back({results[i].energy, results[i].beta.real(),
                        results[i].beta.imag(), std::norm(results[i].beta),
                        results[i].phase.real(), results[i].phase.imag(),
                        curve.delay[i].real(), curve.delay[i].imag(),
                        times.allowed_shift[i], times.forbidden[i]});
    out.write_csv("tunnel.csv",
                  {"E", "re_beta", "im_beta", "transmission", "phi_re", "phi_im",
                   "re_dt", "im_dt", "t_plus_minus_t0", "t_minus"},
                  rows);
    return {{"n_energies", results.size()}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"excited-state criticality toolkit (hbar = k_B = 1)"};
    app.require_subcommand(1);

    std::string config_file, out_dir = ".";
    int threads = 0;
    std::optional<std::uint64_t> seed;
    const std::vector<std::string> names{"spectrum", "density",      "peres",
                                         "flow",     "semiclassics", "quench",
                                         "thermo",   "lattice",      "tunnel"};
    for (const auto& name : names) {
        auto* sub = app.add_subcommand(name, "run the " + name + " analysis");
        sub->add_option("--config", config_file, "JSON run configuration")
            ->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--threads", threads, "OpenMP thread count (0 = default)");
        sub->add_option("--seed", seed, "seed override for stochastic runs");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    std::string name = app.get_subcommands().front()->get_name();

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    auto started = std::chrono::steady_clock::now();
    try {
        json cfg = load_config(config_file);
        OutputWriter out{out_dir};
        json derived;
        if (name == "spectrum") derived = run_spectrum(cfg, out);
        else if (name == "density") derived = run_density(cfg, out);
        else if (name == "peres") derived = run_peres(cfg, out);
        else if (name == "flow") derived = run_flow(cfg, out);
        else if (name == "semiclassics") derived = run_semiclassics(cfg, out, seed);
        else if (name == "quench") derived = run_quench(cfg, out);
        else if (name == "thermo") derived = run_thermo(cfg, out);
        else if (name == "lattice") derived = run_lattice(cfg, out, seed);
        else derived = run_tunnel(cfg, out);

        double wall = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - started)
                          .count();
        json manifest{{"tool", "esqpt_cli"},
                      {"version", "1.0.0"},
                      {"subcommand", name},
                      {"units", "hbar = k_B = 1"},
                      {"config", cfg},
                      {"threads", threads},
                      {"derived", derived},
                      {"outputs", out.outputs},
                      {"wall_time_s", wall}};
        if (seed) manifest["seed_override"] = *seed;
        std::ofstream mf(std::filesystem::path(out_dir) / "run_manifest.json");
        mf << manifest.dump(2) << "\n";
        if (!mf) throw std::runtime_error("cannot write run_manifest.json");
    } catch (const SchemaError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
