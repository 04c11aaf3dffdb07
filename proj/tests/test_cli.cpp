#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spavg/commands.hpp"
#include "spavg/config.hpp"
#include "spavg/error.hpp"
#include "spavg/experiments.hpp"
#include "spavg/numfmt.hpp"
#include "spavg/scheme.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace spavg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    const fs::path p = fs::temp_directory_path() / ("spavg_cli_" + tag + "_" + std::to_string(rng() % 1000000007));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run cli(const std::string& args, const fs::path& dir) {
    const fs::path o = dir / "stdout.txt", e = dir / "stderr.txt";
    const std::string cmd = std::string(SPAVG_CLI_PATH) + " " + args + " > " + o.string() + " 2> " + e.string();
    const int st = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    r.out = slurp(o);
    r.err = slurp(e);
    return r;
}

template <class F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error raised");
    return ErrorKind::Argument;
}

}  // namespace

TEST_CASE("config parsing") {
    ConfigMap m;
    m.load_string(R"(seed = 7   # top level
[system]
name = "example"
x0 = [2.5]
z0 = [0, 1.5]

[sweep]
T = 5
timing = true
[integrator]
method = 'rk4-fixed'
)");
    CHECK(m.get_long("seed", 42) == 7);
    CHECK(m.get_string("system.name", "") == "example");
    CHECK(m.get_list("system.x0", {}) == std::vector<double>{2.5});
    CHECK(m.get_list("system.z0", {}) == std::vector<double>{0.0, 1.5});
    CHECK(m.get_double("sweep.T", 10) == 5.0);
    CHECK(m.get_bool("sweep.timing", false));
    CHECK(m.get_string("integrator.method", "") == "rk4-fixed");
    CHECK(m.get_double("sweep.t_a", 0.25) == 0.25);

    m.set("sweep.T", "8");
    CHECK(m.get_double("sweep.T", 10) == 8.0);

    ConfigMap back;
    back.load_string(m.dump());
    CHECK(back.dump() == m.dump());
    CHECK(back.get_long("seed", 0) == 7);

    CHECK(kind_of([] { ConfigMap c; c.load_string("[system]\nbogus = 1\n"); }) == ErrorKind::Config);
    CHECK(kind_of([] { ConfigMap c; c.load_string("[system\nname = x\n"); }) == ErrorKind::Config);
    CHECK(kind_of([] { ConfigMap c; c.load_string("just words\n"); }) == ErrorKind::Config);
    CHECK(kind_of([] { ConfigMap c; c.set("nope", "1"); }) == ErrorKind::Config);
    CHECK(kind_of([] {
              ConfigMap c;
              c.set("sweep.T", "ten");
              (void)c.get_double("sweep.T", 1.0);
          }) == ErrorKind::Config);
    try {
        ConfigMap c;
        c.load_string("seed = 1\n\n[sweep]\nwhat = 2\n");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
}

TEST_CASE("every command runs through the library with defaults") {
    ConfigMap m;
    m.set("sweep.eps", "[0.15, 0.075, 0.0375, 0.01875]");
    m.set("bounds.eps", "[1e-2, 1e-3]");
    m.set("constants.n_pairs", "2000");
    m.set("constants.n_samples", "2000");
    m.set("grid.L", "1");
    m.set("grid.T", "1");
    for (const auto& name : command_names()) {
        const CommandOutput out = run_command(m, name);
        CHECK_FALSE(out.artifacts.empty());
        for (const auto& [file, data] : out.artifacts) {
            const bool svg = file.size() > 4 && file.substr(file.size() - 4) == ".svg";
            CHECK(data.find(svg ? "<!-- seed = 42 -->" : "seed = 42") != std::string::npos);
        }
    }
    CHECK(kind_of([&] { (void)run_command(m, "nonsense"); }) == ErrorKind::Config);
}

TEST_CASE("grid command prints the library's S_eps and knot table") {
    const fs::path dir = scratch("grid");
    const Run r = cli("grid --system example --eps 1e-4 --L 1 --T 1 -o " + dir.string(), dir);
    REQUIRE(r.code == 0);
    const double S = solve_seps(1.0, 1.0, 1e-4);
    CHECK(r.out.find("S_eps = " + fmt_double(S) + "\n") != std::string::npos);

    const EpsGrid g = build_time_grid(1e-4, S, 1.0, 1'000'000);
    std::string table = "# seed = 42\nl,t_l\n";
    for (std::size_t l = 0; l < g.t_grid.size(); ++l) table += std::to_string(l) + "," + fmt_double(g.t_grid[l]) + "\n";
    CHECK(slurp(dir / "grid.csv") == table);
    CHECK(r.out.rfind(table, 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("figures command writes the four artifacts") {
    const fs::path dir = scratch("fig");
    const fs::path out = dir / "figs";
    const Run r = cli("figures --out " + out.string(), dir);
    REQUIRE(r.code == 0);
    for (const char* f : {"fig1.csv", "fig2.csv", "fig1.svg", "fig2.svg"}) CHECK(fs::exists(out / f));
    const FigureData d = reproduce_figures(FigureOptions{}, IntegratorConfig{});
    CHECK(slurp(out / "fig1.csv") == d.fig1_csv);
    CHECK(slurp(out / "fig2.csv") == d.fig2_csv);
    fs::remove_all(dir);
}

TEST_CASE("sweep command verdict agrees with a fit of its own CSV") {
    const fs::path dir = scratch("sweep");
    std::ofstream(dir / "sweep.toml") << "[system]\nname = \"example\"\n\n[sweep]\nT = 10\n"
                                         "eps = [0.15, 0.075, 0.0375, 0.01875, 0.009375, 0.0046875, 0.00234375]\n";
    const Run r = cli("sweep --config " + (dir / "sweep.toml").string() + " -o " + dir.string(), dir);
    REQUIRE(r.code == 0);
    const std::string last = r.out.substr(r.out.rfind('\n', r.out.size() - 2) + 1);
    CHECK(last == "order ≥ 0.5: PASS\n");

    std::istringstream csv(slurp(dir / "sweep.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "# seed = 42");
    std::getline(csv, line);
    std::vector<double> eps, err;
    while (std::getline(csv, line)) {
        std::istringstream row(line);
        std::string a, b;
        std::getline(row, a, ',');
        std::getline(row, b, ',');
        eps.push_back(std::stod(a));
        err.push_back(std::stod(b));
    }
    REQUIRE(eps.size() == 7);
    const OrderFit f = fit_order(eps, err);
    CHECK(r.out.find("slope = " + fmt_double(f.slope) + ",") != std::string::npos);
    CHECK(f.supported);
    fs::remove_all(dir);
}

TEST_CASE("seed flag reaches the estimators and the headers") {
    const fs::path dir = scratch("seed");
    const Run a = cli("estimate --seed 7 --set constants.n_pairs=2000 --set constants.n_samples=2000 -o " +
                          dir.string(),
                      dir);
    REQUIRE(a.code == 0);
    const std::string with7 = slurp(dir / "constants.txt");
    CHECK(with7.rfind("# seed = 7\n", 0) == 0);
    const Run b = cli("estimate --set constants.n_pairs=2000 --set constants.n_samples=2000 -o " + dir.string(), dir);
    REQUIRE(b.code == 0);
    const std::string with42 = slurp(dir / "constants.txt");
    CHECK(with42.rfind("# seed = 42\n", 0) == 0);
    CHECK(with7 != with42);
    fs::remove_all(dir);
}

TEST_CASE("exit codes") {
    const fs::path dir = scratch("exit");
    const Run unknown = cli("grid --frobnicate", dir);
    CHECK(unknown.code == 2);
    CHECK(unknown.err.find("Usage") != std::string::npos);

    CHECK(cli("", dir).code == 2);
    CHECK(cli("grid --set nowhere.key=1", dir).code == 2);
    CHECK(cli("grid --config " + (dir / "missing.toml").string(), dir).code == 2);

    const Run dom = cli("simulate --set domain.R=1 --set system.x0=[0.99] --set system.z0=[1.5,0] --eps 0.1 -o " +
                            dir.string(),
                        dir);
    CHECK(dom.code == 1);
    CHECK(dom.err.find("domain") != std::string::npos);
    fs::remove_all(dir);
}
