#include "spavg/commands.hpp"

#include "spavg/averaging.hpp"
#include "spavg/bounds.hpp"
#include "spavg/constants.hpp"
#include "spavg/error.hpp"
#include "spavg/experiments.hpp"
#include "spavg/integrate.hpp"
#include "spavg/model.hpp"
#include "spavg/numfmt.hpp"
#include "spavg/scheme.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace spavg {

namespace {

struct Setup {
    SystemBundle b;
    Vec x0;
    Vec z0;
    IntegratorConfig icfg;
    std::uint64_t seed = 42;
    double T = 10.0;
};

std::string seed_line(std::uint64_t seed) { return "# seed = " + std::to_string(seed) + "\n"; }

Vec default_z0(const SystemBundle& b) {
    if (b.sys.name == "example") return {0.0, 1.5};
    const FastDomain& M = b.dom.M;
    if (M.shape() == FastDomain::Shape::Annulus) {
        Vec z = M.center();
        z[0] += 0.5 * (M.inner() + M.outer());
        return z;
    }
    Vec z(M.dim());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = 0.5 * (M.lo()[i] + M.hi()[i]);
    return z;
}

Setup make_setup(const ConfigMap& cm) {
    Setup s;
    const long seed = cm.get_long("seed", 42);
    if (seed < 0) fail(ErrorKind::Config, "seed must be non-negative");
    s.seed = static_cast<std::uint64_t>(seed);
    s.b = make_system(cm.get_string("system.name", "example"));
    s.b.dom.R = cm.get_double("domain.R", s.b.dom.R);
    s.b.dom.eps1 = cm.get_double("domain.eps1", s.b.dom.eps1);
    if (!(s.b.dom.R > 0.0) || !(s.b.dom.eps1 > 0.0)) fail(ErrorKind::Config, "domain.R and domain.eps1 must be positive");
    s.x0 = cm.get_list("system.x0", s.b.sys.name == "example" ? Vec{2.0} : Vec(s.b.sys.n, 0.0));
    s.z0 = cm.get_list("system.z0", default_z0(s.b));
    if (s.x0.size() != s.b.sys.n) fail(ErrorKind::Config, "system.x0 has the wrong dimension");
    if (s.z0.size() != s.b.sys.m) fail(ErrorKind::Config, "system.z0 has the wrong dimension");

    const std::string method = cm.get_string("integrator.method", "rk45-adaptive");
    if (method == "rk45-adaptive")
        s.icfg.method = Method::Rk45Adaptive;
    else if (method == "rk4-fixed")
        s.icfg.method = Method::Rk4Fixed;
    else
        fail(ErrorKind::Config, "integrator.method must be rk45-adaptive or rk4-fixed");
    s.icfg.h = cm.get_double("integrator.h", s.icfg.h);
    s.icfg.rel_tol = cm.get_double("integrator.rel_tol", s.icfg.rel_tol);
    s.icfg.abs_tol = cm.get_double("integrator.abs_tol", s.icfg.abs_tol);
    s.icfg.max_steps = cm.get_long("integrator.max_steps", s.icfg.max_steps);
    s.icfg.max_step = cm.get_double("integrator.max_step", s.icfg.max_step);
    try {
        s.icfg.validate();
    } catch (const Error& e) {
        fail(ErrorKind::Config, e.what());
    }
    s.T = cm.get_double("sweep.T", 10.0);
    if (!(s.T > 0.0)) fail(ErrorKind::Config, "sweep.T must be positive");
    return s;
}

std::vector<Vec> fast_samples(const SystemBundle& b, std::uint64_t seed) {
    const FastDomain& M = b.dom.M;
    std::vector<Vec> out;
    if (M.shape() == FastDomain::Shape::Annulus && M.dim() == 2) {
        const double inner = std::max(M.inner(), 1e-3 * M.outer());
        for (double r : {inner, M.outer()})
            for (int k = 0; k < 4; ++k) {
                const double th = std::numbers::pi / 4 + k * std::numbers::pi / 2;
                out.push_back({M.center()[0] + r * std::cos(th), M.center()[1] + r * std::sin(th)});
            }
        return out;
    }
    std::mt19937_64 rng(seed);
    while (out.size() < 8) {
        Vec z = M.sample(rng);
        if (!(b.sys.excluded && b.sys.excluded->contains(z))) out.push_back(std::move(z));
    }
    return out;
}

std::vector<Vec> slow_points(const ConfigMap& cm, const Setup& s) {
    std::vector<Vec> xs;
    if (cm.has("average.x")) {
        if (s.b.sys.n != 1) fail(ErrorKind::Config, "average.x lists scalar points; the system is not scalar");
        for (double v : cm.get_list("average.x", {})) xs.push_back({v});
        return xs;
    }
    if (s.b.sys.n == 1) {
        for (int k = 0; k < 10; ++k) xs.push_back({-s.b.dom.R + 2.0 * s.b.dom.R * k / 9.0});
        return xs;
    }
    std::mt19937_64 rng(s.seed);
    for (int k = 0; k < 10; ++k) xs.push_back(s.b.dom.sample_slow(s.b.sys.n, rng));
    return xs;
}

AverageOptions average_options(const ConfigMap& cm, AverageWindow w) {
    AverageOptions o;
    o.window = w;
    o.max_dtau = cm.get_double("average.max_dtau", 0.01);
    return o;
}

// Closed-form average when known; otherwise the numeric one, after checking
// that the average does not depend on the fast initial condition.
SlowField average_field(const ConfigMap& cm, const Setup& s) {
    if (s.b.sys.f_av) return s.b.sys.f_av;
    const double T_av = cm.get_double("average.T_av", 500.0);
    const double tol = cm.get_double("average.tol", 1e-3);
    const auto diag = check_average_well_defined(s.b.sys, slow_points(cm, s), fast_samples(s.b, s.seed), T_av, tol,
                                                 s.icfg, average_options(cm, AverageWindow::Bump));
    for (const auto& d : diag)
        if (!d.pass)
            fail(ErrorKind::Assumption, "average depends on the fast initial condition at x = (" + join_csv(d.x) +
                                            "): spread " + fmt_double(d.z0_spread) + " > " + fmt_double(tol));
    return build_fav_field(s.b.sys, s.z0, T_av, s.icfg, average_options(cm, AverageWindow::Bump));
}

ConstantSet resolve_constants(const ConfigMap& cm, const Setup& s) {
    ConstantSet c;
    if (cm.has("constants.file")) {
        const std::string path = cm.get_string("constants.file", "");
        std::ifstream in(path);
        if (!in) fail(ErrorKind::Config, "cannot read constants file '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        c = constants_from_text(ss.str());
        if (cm.has("sweep.T")) c.T = s.T;
    } else {
        EstimateOptions eo;
        eo.n_pairs = static_cast<std::size_t>(cm.get_long("constants.n_pairs", 20'000));
        eo.n_samples = static_cast<std::size_t>(cm.get_long("constants.n_samples", 20'000));
        eo.n_decay_runs = static_cast<std::size_t>(cm.get_long("constants.decay_runs", 8));
        eo.T = s.T;
        eo.seed = s.seed;
        c = estimate_constants(s.b, eo, s.b.sys.f_av ? SlowField{} : average_field(cm, s));
    }
    c.seed = s.seed;
    c.L = cm.get_double("constants.L", c.L);
    c.P = cm.get_double("constants.P", c.P);
    c.L_av = cm.get_double("constants.L_av", c.L_av);
    c.r_y = cm.get_double("constants.r_y", c.r_y);
    if (cm.has("constants.beta_y")) {
        c.beta_y = cm.get_double("constants.beta_y", c.beta_y);
        c.delta_y = 0.5 * c.beta_y;
    }
    c.delta_y = cm.get_double("constants.delta_y", c.delta_y);
    try {
        c.validate();
    } catch (const Error& e) {
        fail(ErrorKind::Config, e.what());
    }
    return c;
}

std::vector<double> default_sweep_eps(double eps1) {
    std::vector<double> e;
    for (int k = 0; k <= 6; ++k) e.push_back(std::ldexp(std::min(eps1, 0.15), -k));
    return e;
}

CommandOutput cmd_simulate(const ConfigMap& cm) {
    const Setup s = make_setup(cm);
    const double eps = cm.get_double("simulate.eps", s.b.dom.eps1);
    if (!(eps > 0.0 && eps <= s.b.dom.eps1)) fail(ErrorKind::Config, "simulate.eps must lie in (0, eps1]");
    const double tau_end = cm.get_double("simulate.tau_end", s.T / eps);
    CommandOutput out;
    const FullSolution full = integrate_full(s.b.sys, s.x0, s.z0, eps, s.T, s.icfg, &s.b.dom);
    const Trajectory bl = integrate_boundary_layer(s.b.sys, s.x0, s.z0, tau_end, s.icfg);
    const Trajectory red = integrate_reduced(average_field(cm, s), s.x0, s.T, s.icfg);
    const std::string head = seed_line(s.seed);
    out.artifacts.emplace_back("full_x.csv", head + trajectory_csv(full.x));
    out.artifacts.emplace_back("full_z.csv", head + trajectory_csv(full.z));
    out.artifacts.emplace_back("boundary.csv", head + trajectory_csv(bl));
    out.artifacts.emplace_back("reduced.csv", head + trajectory_csv(red));
    std::ostringstream os;
    os << "system = " << s.b.sys.name << '\n'
       << "eps = " << fmt_double(eps) << '\n'
       << "T = " << fmt_double(s.T) << '\n'
       << "x(T) = " << join_csv(full.x.final_state()) << '\n'
       << "x_av(T) = " << join_csv(red.final_state()) << '\n'
       << "full samples = " << full.x.size() << '\n'
       << "seed = " << s.seed << '\n';
    out.summary = os.str();
    return out;
}

CommandOutput cmd_average(const ConfigMap& cm) {
    const Setup s = make_setup(cm);
    const double T_av = cm.get_double("average.T_av", 500.0);
    const double tol = cm.get_double("average.tol", 1e-3);
    const auto xs = slow_points(cm, s);
    const auto zs = fast_samples(s.b, s.seed);
    const auto diag = check_average_well_defined(s.b.sys, xs, zs, T_av, tol, s.icfg,
                                                 average_options(cm, AverageWindow::Bump));
    double worst = 0.0;
    for (const auto& d : diag) worst = std::max(worst, d.z0_spread);
    for (const auto& d : diag)
        if (!d.pass)
            fail(ErrorKind::Assumption, "average depends on the fast initial condition at x = (" + join_csv(d.x) +
                                            "): spread " + fmt_double(d.z0_spread) + " > " + fmt_double(tol));

    std::ostringstream avg;
    avg << seed_line(s.seed);
    for (std::size_t i = 0; i < s.b.sys.n; ++i) avg << "x_" << i << ',';
    for (std::size_t i = 0; i < s.b.sys.n; ++i) avg << "f_av_" << i << ',';
    avg << "T_av,cauchy_gap,z0_spread\n";
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const AverageResult r = compute_fav(s.b.sys, xs[k], s.z0, T_av, s.icfg, average_options(cm, AverageWindow::Uniform));
        avg << join_csv(r.x) << ',' << join_csv(r.f_av) << ',' << fmt_double(r.T_av) << ','
            << fmt_double(r.cauchy_gap) << ',' << fmt_double(diag[k].z0_spread) << '\n';
    }

    const SlowField field = s.b.sys.f_av ? s.b.sys.f_av
                                         : build_fav_field(s.b.sys, s.z0, T_av, s.icfg,
                                                           average_options(cm, AverageWindow::Bump));
    const GammaEnvelope env =
        estimate_gamma(s.b.sys, field, xs, zs, cm.get_list("average.s_grid", {5, 10, 20, 50, 100}),
                       cm.get_list("average.tau_prime", {0.0, 7.3, 31.1}), s.icfg,
                       cm.get_double("average.max_dtau", 0.01));

    CommandOutput out;
    out.artifacts.emplace_back("average.csv", avg.str());
    out.artifacts.emplace_back("gamma.csv", seed_line(s.seed) + gamma_csv(env));
    std::ostringstream os;
    os << "system = " << s.b.sys.name << '\n'
       << "T_av = " << fmt_double(T_av) << '\n'
       << "max z0 spread = " << fmt_double(worst) << " (tol " << fmt_double(tol) << ")\n"
       << "seed = " << s.seed << '\n';
    out.summary = os.str();
    return out;
}

CommandOutput cmd_grid(const ConfigMap& cm) {
    const Setup s = make_setup(cm);
    const double eps = cm.get_double("grid.eps", s.b.dom.eps1);
    const double T = cm.get_double("grid.T", s.T);
    const double L = cm.has("grid.L") ? cm.get_double("grid.L", 1.0) : resolve_constants(cm, s).L;
    if (!(eps > 0.0 && eps < 1.0)) fail(ErrorKind::Config, "grid.eps must lie in (0, 1)");
    if (!(L > 0.0) || !(T > 0.0)) fail(ErrorKind::Config, "grid.L and grid.T must be positive");
    const double S = solve_seps(L, T, eps);
    const auto budget = static_cast<std::size_t>(cm.get_long("grid.max_intervals", 1'000'000));
    const EpsGrid g = build_time_grid(eps, S, T, budget);
    std::ostringstream csv;
    csv << seed_line(s.seed) << "l,t_l\n";
    for (std::size_t l = 0; l < g.t_grid.size(); ++l) csv << l << ',' << fmt_double(g.t_grid[l]) << '\n';
    CommandOutput out;
    out.artifacts.emplace_back("grid.csv", csv.str());
    std::ostringstream os;
    os << "S_eps = " << fmt_double(S) << '\n'
       << "residual = " << fmt_double(seps_residual(L, T, eps, S)) << '\n'
       << "eps*S_eps = " << fmt_double(eps * S) << '\n'
       << "intervals = " << g.interval_count() << '\n'
       << "last_index = " << g.last_index << '\n'
       << "degenerate = " << (g.degenerate ? "true" : "false") << '\n'
       << "seed = " << s.seed << '\n';
    out.summary = os.str();
    return out;
}

std::function<double(double)> gamma_source(const ConfigMap& cm, const Setup& s, GammaEnvelope& env) {
    if (s.b.sys.gamma) return s.b.sys.gamma;
    env = estimate_gamma(s.b.sys, average_field(cm, s), slow_points(cm, s), fast_samples(s.b, s.seed),
                         cm.get_list("average.s_grid", {5, 10, 20, 50, 100}),
                         cm.get_list("average.tau_prime", {0.0, 7.3, 31.1}), s.icfg,
                         cm.get_double("average.max_dtau", 0.01));
    return [&env](double sv) { return env.at(sv); };
}

CommandOutput cmd_bounds(const ConfigMap& cm) {
    const Setup s = make_setup(cm);
    const ConstantSet c = resolve_constants(cm, s);
    std::vector<double> eps_default;
    for (int k = 2; k <= 12; ++k) eps_default.push_back(std::pow(10.0, -k));
    const auto eps = cm.get_list("bounds.eps", eps_default);
    GammaEnvelope env;
    const auto gamma = gamma_source(cm, s, env);
    std::vector<BoundReport> rows;
    for (double e : eps) rows.push_back(bound_report(e, c, gamma));
    const auto cond = check_gamma_condition(gamma, c, cm.get_double("bounds.r_prime", 1.0),
                                            cm.get_double("bounds.alpha1", 3.0), eps);
    std::ostringstream gc;
    gc << seed_line(s.seed) << "eps,S_eps,log_gap,holds\n";
    for (const auto& r : cond)
        gc << fmt_double(r.eps) << ',' << fmt_double(r.S_eps) << ',' << fmt_double(r.log_gap) << ','
           << (r.holds ? "true" : "false") << '\n';
    const double t_a = cm.get_double("sweep.t_a", 0.1 * c.T);
    const EpsDoubleStar es = eps_double_star(t_a, c);

    CommandOutput out;
    out.artifacts.emplace_back("bounds.csv", seed_line(s.seed) + bound_report_csv(rows));
    out.artifacts.emplace_back("gamma_condition.csv", gc.str());
    out.artifacts.emplace_back("constants.txt", constants_to_text(c));
    std::ostringstream os;
    os << "eps_bar = " << fmt_double(eps_bar(c)) << '\n'
       << "eps_double_star = " << fmt_double(es.eps) << (es.vacuous ? " (condition vacuous)" : "") << '\n'
       << "rows = " << rows.size() << '\n'
       << "seed = " << s.seed << '\n';
    out.summary = os.str();
    return out;
}

CommandOutput cmd_sweep(const ConfigMap& cm) {
    const Setup s = make_setup(cm);
    const ConstantSet c = resolve_constants(cm, s);
    SweepOptions so;
    so.T = s.T;
    so.t_a = cm.get_double("sweep.t_a", 0.1 * s.T);
    so.min_points = static_cast<std::size_t>(cm.get_long("sweep.min_points", 2000));
    so.timing = cm.get_bool("sweep.timing", false);
    const auto eps = cm.get_list("sweep.eps", default_sweep_eps(s.b.dom.eps1));
    const SweepResult r = closeness_sweep(s.b, s.x0, s.z0, eps, s.icfg, c, so,
                                          s.b.sys.f_av ? SlowField{} : average_field(cm, s));
    CommandOutput out;
    out.artifacts.emplace_back("sweep.csv", sweep_csv(r));
    std::ostringstream os;
    std::size_t ok = 0;
    for (const auto& row : r.rows) {
        if (row.status == "ok")
            ++ok;
        else
            os << "eps = " << fmt_double(row.eps) << ": " << row.status << ": " << row.detail << '\n';
    }
    os << "rows = " << r.rows.size() << " (ok " << ok << ")\n"
       << "seed = " << s.seed << '\n';
    try {
        const OrderFit f = fit_order(r, SweepColumn::SupXErr);
        out.verdict = f.supported ? 1 : 0;
        os << "slope = " << fmt_double(f.slope) << ", intercept = " << fmt_double(f.intercept)
           << ", r2 = " << fmt_double(f.r2) << '\n';
    } catch (const Error& e) {
        out.verdict = 0;
        os << "fit unavailable: " << e.what() << '\n';
    }
    os << "order ≥ 0.5: " << (out.verdict == 1 ? "PASS" : "FAIL") << '\n';
    out.summary = os.str();
    return out;
}

CommandOutput cmd_figures(const ConfigMap& cm) {
    const Setup s = make_setup(cm);
    if (s.b.sys.name != "example") fail(ErrorKind::Config, "figures reproduce the built-in example only");
    FigureOptions fo;
    fo.T = s.T;
    fo.x0 = s.x0;
    fo.z0 = s.z0;
    fo.eps_a = cm.get_double("figures.eps_a", 0.15);
    fo.eps_b = cm.get_double("figures.eps_b", 0.015);
    fo.min_points = static_cast<std::size_t>(cm.get_long("sweep.min_points", 2000));
    fo.seed = s.seed;
    const FigureData d = reproduce_figures(fo, s.icfg);
    const std::string svg_head = "<!-- seed = " + std::to_string(s.seed) + " -->\n";
    CommandOutput out;
    out.artifacts.emplace_back("fig1.csv", d.fig1_csv);
    out.artifacts.emplace_back("fig2.csv", d.fig2_csv);
    out.artifacts.emplace_back("fig1.svg", svg_head + d.fig1_svg);
    out.artifacts.emplace_back("fig2.svg", svg_head + d.fig2_svg);
    double ea = 0.0, eb = 0.0;
    for (std::size_t i = 0; i < d.t.size(); ++i) {
        ea = std::max(ea, std::abs(d.x_a[i] - d.x_av[i]));
        eb = std::max(eb, std::abs(d.x_b[i] - d.x_av[i]));
    }
    std::ostringstream os;
    os << "sup |x - x_av| at eps = " << fmt_double(fo.eps_a) << ": " << fmt_double(ea) << '\n'
       << "sup |x - x_av| at eps = " << fmt_double(fo.eps_b) << ": " << fmt_double(eb) << '\n'
       << "seed = " << s.seed << '\n';
    out.summary = os.str();
    return out;
}

CommandOutput cmd_estimate(const ConfigMap& cm) {
    const Setup s = make_setup(cm);
    const ConstantSet c = resolve_constants(cm, s);
    CommandOutput out;
    out.artifacts.emplace_back("constants.txt", constants_to_text(c));
    out.summary = constants_to_text(c);
    return out;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"simulate", "average", "grid", "bounds", "sweep", "figures", "estimate"};
    return names;
}

CommandOutput run_command(const ConfigMap& cm, const std::string& command) {
    if (command == "simulate") return cmd_simulate(cm);
    if (command == "average") return cmd_average(cm);
    if (command == "grid") return cmd_grid(cm);
    if (command == "bounds") return cmd_bounds(cm);
    if (command == "sweep") return cmd_sweep(cm);
    if (command == "figures") return cmd_figures(cm);
    if (command == "estimate") return cmd_estimate(cm);
    fail(ErrorKind::Config, "unknown command '" + command + "'");
}

}  // namespace spavg
