// End-to-end checks of the command-line driver: exit-code contract,
// schema rejection, and bitwise-deterministic reruns.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

fs::path make_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("esqpt_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& file, const std::string& body) {
    std::ofstream out(file);
    out << body;
    REQUIRE(static_cast<bool>(out));
}

std::string read_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    REQUIRE(static_cast<bool>(in));
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(ESQPT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("identical config reruns are byte-identical") {
    fs::path base = make_dir("determinism");
    fs::path cfg = base / "density.json";
    write_file(cfg, R"({
        "model": {"type": "lipkin", "N": 120, "lambda": 2.0, "chi": 0.0}
    })");
    fs::path a = base / "a", b = base / "b";
    CHECK(run_cli("density --config " + cfg.string() + " --out " + a.string()) == 0);
    CHECK(run_cli("density --config " + cfg.string() + " --out " + b.string() +
                  " --threads 2") == 0);
    std::string body_a = read_file(a / "density.csv");
    std::string body_b = read_file(b / "density.csv");
    CHECK(body_a == body_b);
    CHECK(body_a.rfind("# units: hbar = k_B = 1\n", 0) == 0);
    CHECK(body_a.find("E,rho,drho_dE") != std::string::npos);
    CHECK(read_file(a / "run_manifest.json").find("fnv1a64") != std::string::npos);
}

TEST_CASE("schema violations exit with status 2") {
    fs::path base = make_dir("schema");

    fs::path unknown = base / "unknown.json";
    write_file(unknown, R"({
        "model": {"type": "lipkin", "N": 20, "lambda": 1.0, "coupling": 3.0}
    })");
    CHECK(run_cli("density --config " + unknown.string() + " --out " +
                  (base / "o1").string()) == 2);

    fs::path malformed = base / "malformed.json";
    write_file(malformed, "{ \"model\": {\n  \"type\": \"lipkin\",\n");
    CHECK(run_cli("density --config " + malformed.string() + " --out " +
                  (base / "o2").string()) == 2);

    CHECK(run_cli("density --config " + (base / "missing.json").string() +
                  " --out " + (base / "o3").string()) == 2);

    fs::path wrong_type = base / "wrong_type.json";
    write_file(wrong_type, R"({
        "model": {"type": "lipkin", "N": 20, "lambda": "two"}
    })");
    CHECK(run_cli("density --config " + wrong_type.string() + " --out " +
                  (base / "o4").string()) == 2);
}

TEST_CASE("stochastic analyses demand a seed") {
    fs::path base = make_dir("seed");
    fs::path cfg = base / "lattice_mc.json";
    write_file(cfg, R"({
        "dispersion": {"eps": 0.0, "tau": 1.0, "n": 2},
        "grid": {"e_min": -4.5, "e_max": 4.5, "n_points": 61},
        "mc": {"n_samples": 20000}
    })");
    CHECK(run_cli("lattice --config " + cfg.string() + " --out " +
                  (base / "no_seed").string()) == 2);
    fs::path a = base / "a", b = base / "b";
    CHECK(run_cli("lattice --config " + cfg.string() + " --out " + a.string() +
                  " --seed 42") == 0);
    CHECK(run_cli("lattice --config " + cfg.string() + " --out " + b.string() +
                  " --seed 42") == 0);
    CHECK(read_file(a / "lattice.csv") == read_file(b / "lattice.csv"));
}

TEST_CASE("tunnel run emits the scattering table") {
    fs::path base = make_dir("tunnel");
    fs::path cfg = base / "tunnel.json";
    write_file(cfg, R"({
        "potential": {
            "c0": 0.5, "c1": 0.1, "c2": 0.5,
            "width_sq": 10.0, "support": [-16.0, 16.0], "mass": 1.0
        },
        "energies": {"e_min": 1.0, "e_max": 1.4, "n_points": 9}
    })");
    fs::path out = base / "out";
    CHECK(run_cli("tunnel --config " + cfg.string() + " --out " + out.string()) == 0);
    std::string body = read_file(out / "tunnel.csv");
    CHECK(body.find("E,re_beta,im_beta,transmission,phi_re,phi_im,"
                    "re_dt,im_dt,t_plus_minus_t0,t_minus") != std::string::npos);
    int lines = 0;
    for (char c : body)
        if (c == '\n') ++lines;
    CHECK(lines >= 11);  // units line, header, at least the requested energies
}

TEST_CASE("semiclassics reports classical stationary points") {
    fs::path base = make_dir("semiclassics");
    fs::path cfg = base / "lipkin.json";
    write_file(cfg, R"({
        "model": {"type": "lipkin", "N": 100, "lambda": 2.0, "chi": 0.0},
        "multistart": {"n_seeds": 200, "seed": 7}
    })");
    fs::path out = base / "out";
    CHECK(run_cli("semiclassics --config " + cfg.string() + " --out " +
                  out.string()) == 0);
    std::string report = read_file(out / "stationary_points.json");
    CHECK(report.find("\"energy\"") != std::string::npos);
    CHECK(report.find("\"shape\"") != std::string::npos);
}
