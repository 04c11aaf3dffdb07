// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria.
#include "spavg/averaging.hpp"
#include "spavg/bounds.hpp"
#include "spavg/commands.hpp"
#include "spavg/constants.hpp"
#include "spavg/experiments.hpp"
#include "spavg/integrate.hpp"
#include "spavg/model.hpp"
#include "spavg/numfmt.hpp"
#include "spavg/scheme.hpp"

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

using namespace spavg;
using Big = boost::multiprecision::cpp_dec_float_50;
namespace fs = std::filesystem;

namespace {

// tolerances and limits
constexpr double kBoundaryTol = 1e-7;
constexpr double kAverageSlack = 1e-6;
constexpr double kSpreadTol = 1e-3;
constexpr double kT_av = 500.0;
constexpr double kSepsResidual = 1e-10;
constexpr double kFinalScaled = 0.05;
constexpr double kMinSlope = 0.45;
constexpr double kMinR2 = 0.9;
constexpr double kBand = 0.05;
constexpr double kOracleTol = 1e-10;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double norm_eta(const AttractorSpec& att, const Vec& z) { return att.dist(z); }

std::vector<Vec> fast_samples() {
    std::vector<Vec> out;
    for (double r : {0.5, 1.5})
        for (int k = 0; k < 4; ++k) {
            const double th = std::numbers::pi / 4 + k * std::numbers::pi / 2;
            out.push_back({r * std::cos(th), r * std::sin(th)});
        }
    return out;
}

std::vector<Vec> slow_points() {
    std::vector<Vec> xs;
    for (int i = 0; i < 10; ++i) xs.push_back({-2.5 + 5.0 * i / 9.0});
    return xs;
}

const ConstantSet& example_constants() {
    static const ConstantSet c = estimate_constants(builtin_example(), EstimateOptions{});
    return c;
}

std::vector<double> halving() {
    std::vector<double> v;
    for (int k = 0; k <= 6; ++k) v.push_back(0.15 * std::pow(2.0, -k));
    return v;
}

Outcome c1_boundary_layer() {
    const auto b = builtin_example();
    double worst = 0.0;
    for (double r0 : {0.5, 1.2, 1.5}) {
        const Vec z0{r0, 0.0};
        const double d0 = norm_eta(b.att, z0);
        const Trajectory tr = integrate_boundary_layer(b.sys, {0.0}, z0, 10.0, IntegratorConfig{});
        for (std::size_t i = 0; i < tr.size(); ++i)
            worst = std::max(worst, std::abs(norm_eta(b.att, tr.states[i]) - std::exp(-tr.times[i]) * d0));
        for (int k = 0; k <= 1000; ++k) {
            const double tau = 0.01 * k;
            worst = std::max(worst, std::abs(norm_eta(b.att, tr.at(tau)) - std::exp(-tau) * d0));
        }
    }
    return {worst <= kBoundaryTol, "max error " + fmt_double(worst)};
}

Outcome c2_average() {
    const auto b = builtin_example();
    double worst_ratio = 0.0;
    for (const Vec& x : slow_points())
        for (const Vec& z0 : fast_samples()) {
            const AverageResult r = compute_fav(b.sys, x, z0, kT_av, IntegratorConfig{});
            const double r0 = std::hypot(z0[0], z0[1]);
            const double allowed = 2.0 * std::max(r0, 1.0) / kT_av + kAverageSlack;
            worst_ratio = std::max(worst_ratio, std::abs(r.f_av[0] + x[0]) / allowed);
        }
    double spread = 0.0;
    for (const auto& d :
         check_average_well_defined(b.sys, slow_points(), fast_samples(), kT_av, kSpreadTol, IntegratorConfig{}))
        spread = std::max(spread, d.z0_spread);
    return {worst_ratio <= 1.0 && spread <= kSpreadTol,
            "worst error/allowed " + fmt_double(worst_ratio) + ", spread " + fmt_double(spread)};
}

Outcome c3_gamma() {
    const auto b = builtin_example();
    const std::vector<double> s_grid{5, 10, 20, 50, 100};
    double worst = 0.0;
    for (const Vec& z0 : fast_samples()) {
        const GammaEnvelope env =
            estimate_gamma(b.sys, b.sys.f_av, slow_points(), {z0}, s_grid, {0.0, 7.3, 31.1}, IntegratorConfig{});
        const double r0 = std::hypot(z0[0], z0[1]);
        for (std::size_t i = 0; i < s_grid.size(); ++i)
            worst = std::max(worst, env.gamma_hat[i] / (2.0 * std::max(r0, 1.0) / s_grid[i]));
    }
    return {worst <= 1.0, "max gamma_hat / (2 max{r0,1}/s) = " + fmt_double(worst)};
}

Outcome c4_interval_length() {
    double prev_S = 0.0, prev_q = INFINITY, worst_res = 0.0, q = 0.0;
    bool mono = true;
    for (int k = 2; k <= 12; ++k) {
        const double eps = std::pow(10.0, -k);
        const double S = solve_seps(1.0, 1.0, eps);
        q = std::pow(eps, 0.25) * S;
        mono = mono && S > prev_S && q < prev_q;
        worst_res = std::max(worst_res, seps_residual(1.0, 1.0, eps, S));
        prev_S = S;
        prev_q = q;
    }
    return {mono && q < kFinalScaled && worst_res <= kSepsResidual,
            std::string(mono ? "monotone" : "not monotone") + ", final eps^(1/4) S = " + fmt_double(q) +
                ", max residual " + fmt_double(worst_res)};
}

Outcome c5_inequalities() {
    const auto b = builtin_example();
    ConstantSet c = example_constants();
    c.T = 10.0;
    const Vec x0{2.0}, z0{0.0, 1.5};
    double gap_Delta = -INFINITY, gap_D = -INFINITY, gap_K = -INFINITY;
    std::string methods;
    for (double eps : {0.15, 0.075, 0.0375, 0.015}) {
        const FullSolution full = integrate_full(b.sys, x0, z0, eps, c.T, IntegratorConfig{}, &b.dom);
        const double S = solve_seps(c.L, c.T, eps);
        const SignalSummary sig = scheme_signal_summary(b.sys, eps, S, c.T, x0, z0, full, IntegratorConfig{});
        const BoundReport br = bound_report(eps, c, b.sys.gamma);
        const Trajectory red = integrate_reduced(b.sys.f_av, x0, c.T, IntegratorConfig{});
        double sup_x = 0.0;
        for (int k = 0; k <= 4000; ++k) {
            const double t = c.T * k / 4000.0;
            sup_x = std::max(sup_x, std::abs(full.x.at(t)[0] - red.at(t)[0]));
        }
        gap_Delta = std::max(gap_Delta, std::log(sig.Delta_max) - br.Delta_bar.log_abs());
        gap_D = std::max(gap_D, std::log(sig.D_max) - br.D_bar.log_abs());
        gap_K = std::max(gap_K, std::log(sup_x) - br.K.log_abs());
        methods = method_name(sig.method);
    }
    return {gap_Delta <= 0.0 && gap_D <= 0.0 && gap_K <= 0.0,
            "max log(measured/bound): Delta " + fmt_double(gap_Delta) + ", D " + fmt_double(gap_D) + ", K " +
                fmt_double(gap_K) + " (" + methods + ", L = " + fmt_double(c.L) + ")"};
}

Outcome c6_order() {
    const auto b = builtin_example();
    const SweepResult r =
        closeness_sweep(b, {2.0}, {0.0, 1.5}, halving(), IntegratorConfig{}, example_constants(), SweepOptions{});
    const OrderFit f = fit_order(r, SweepColumn::SupXErr);
    return {f.slope >= kMinSlope && f.r2 >= kMinR2 && f.used == 7,
            "slope " + fmt_double(f.slope) + ", r2 " + fmt_double(f.r2) + ", rows " + std::to_string(f.used)};
}

Outcome c7_figures() {
    const FigureOptions o;
    const FigureData d = reproduce_figures(o, IntegratorConfig{});
    double sup_a = 0.0, sup_b = 0.0;
    for (std::size_t i = 0; i < d.t.size(); ++i) {
        sup_a = std::max(sup_a, std::abs(d.x_a[i] - d.x_av[i]));
        sup_b = std::max(sup_b, std::abs(d.x_b[i] - d.x_av[i]));
    }
    // transient from the closed-form decay: e^{-t/eps} |z0|_eta <= 0.05
    const double d0 = std::abs(std::hypot(o.z0[0], o.z0[1]) - 1.0);
    bool settled = true;
    std::string exits;
    for (const auto& [eps, zn] : {std::pair{o.eps_a, &d.znorm_a}, std::pair{o.eps_b, &d.znorm_b}}) {
        const double limit = 5.0 * eps * std::log(100.0 * d0);
        double last_out = 0.0;
        for (std::size_t i = 0; i < d.t.size(); ++i)
            if (std::abs((*zn)[i] - 1.0) > kBand) last_out = d.t[i];
        settled = settled && last_out <= limit;
        exits += " " + fmt_double(last_out) + "<=" + fmt_double(limit);
    }
    return {sup_b < sup_a && settled,
            "sup|x-x_av| " + fmt_double(sup_a) + " -> " + fmt_double(sup_b) + ", band exits" + exits};
}

Outcome c8_sqrt_mirrors() {
    ConstantSet c;
    c.L = c.T = c.P = 1.0;
    std::vector<double> eps;
    std::vector<BoundTerms> terms;
    for (int k = 2; k <= 12; ++k) {
        eps.push_back(std::pow(10.0, -k));
        terms.push_back(bound_terms(eps.back(), solve_seps(1.0, 1.0, eps.back()), c));
    }
    bool ok = true;
    for (std::size_t i = eps.size() - 4; i + 1 < eps.size(); ++i) {
        const double a = std::sqrt(eps[i]), b = std::sqrt(eps[i + 1]);
        auto down = [&](const LogReal& x0, const LogReal& x1) { return x1.value() / b < x0.value() / a; };
        for (std::size_t j = 0; j < 3; ++j)
            ok = ok && down(terms[i].delta[j], terms[i + 1].delta[j]) &&
                 down(terms[i].d_log_delta[j], terms[i + 1].d_log_delta[j]);
        ok = ok && down(terms[i].d_tail, terms[i + 1].d_tail);
    }
    return {ok, "eps = 1e-9 .. 1e-12"};
}

Outcome c9_oracle() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto in = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        ConstantSet c;
        c.L = in(0.1, 3.0);
        c.T = in(0.5, 5.0);
        c.P = in(0.5, 8.0);
        c.L_av = in(0.1, 3.0);
        c.R = in(0.5, 4.0);
        c.z_bar = in(0.5, 4.0);
        c.r_y = in(1.0, 3.0);
        c.beta_y = in(0.3, 3.0);
        c.delta_y = c.beta_y * in(0.1, 0.9);
        const double eps = std::pow(10.0, in(-8.0, -2.0));
        const double gamma = in(0.0, 2.0);
        const double S = solve_seps(c.L, c.T, eps);

        const LogReal db = delta_bar(eps, S, c);
        const LogReal dd = d_bar(eps, S, db, c);
        const LogReal k = k_eps(eps, S, db, gamma, c);
        const LogReal f = f_eps(eps, S, dd, c);

        const Big L = c.L, T = c.T, P = c.P, Lav = c.L_av, e = eps, s = S, g = gamma;
        const Big m = std::max(c.R, c.z_bar);
        const Big eLS = exp(L * s);
        const Big Delta = (2 * e * s * P + T * L * (e * s * P + e) * (1 + L * s * eLS)) * exp(T * L * (1 + s * L * eLS));
        const Big D = s * L * (Delta + e * s * P + e) * eLS;
        const Big K = Delta + T * g * m + e * s * Lav * (e * s * P + T * g * m) * exp(e * s * Lav);
        const Big F = D * (1 + Big(c.r_y) * exp(-Big(c.beta_y) * s) / (1 - exp(-(Big(c.beta_y) - Big(c.delta_y)) * s)));

        const std::pair<const LogReal*, const Big*> pairs[] = {{&db, &Delta}, {&dd, &D}, {&k, &K}, {&f, &F}};
        for (const auto& [v, ref] : pairs)
            worst = std::max(worst, std::abs(v->log_abs() - static_cast<double>(log(*ref))));
    }
    return {worst <= kOracleTol, "max relative deviation " + fmt_double(worst)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome c10_determinism() {
    const fs::path root = fs::temp_directory_path() / ("spavg_acceptance_" + std::to_string(::getpid()));
    ConfigMap cm;
    cm.set("sweep.eps", "[0.15, 0.075, 0.0375, 0.01875, 0.009375, 0.0046875, 0.00234375]");
    std::size_t files = 0;
    bool same = true;
    for (const char* cmd : {"sweep", "figures"}) {
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path dir = root / std::to_string(rep);
            fs::create_directories(dir);
            for (const auto& [name, data] : run_command(cm, cmd).artifacts)
                std::ofstream(dir / name, std::ios::binary) << data;
        }
        for (const auto& entry : fs::directory_iterator(root / "0")) {
            if (entry.path().extension() != ".csv") continue;
            ++files;
            same = same && slurp(entry.path()) == slurp(root / "1" / entry.path().filename());
        }
        fs::remove_all(root);
    }
    return {same && files == 3, std::to_string(files) + " CSV files compared"};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all{
        {1, "boundary-layer exactness", 1.0, c1_boundary_layer},
        {2, "average reproduction", 10.0, c2_average},
        {3, "averaging envelope", 30.0, c3_gamma},
        {4, "interval length properties", 1.0, c4_interval_length},
        {5, "scheme and closeness inequalities", 120.0, c5_inequalities},
        {6, "empirical order", 180.0, c6_order},
        {7, "figure reproduction", 30.0, c7_figures},
        {8, "sqrt(eps) mirrors", 1.0, c8_sqrt_mirrors},
        {9, "50-digit oracle equivalence", 10.0, c9_oracle},
        {10, "determinism", 1e9, c10_determinism},
    };
    int failed = 0;
    for (const auto& c : all) {
        if (c.id == 5 || c.id == 6) (void)example_constants();  // estimation is shared setup, not timed
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool pass = o.pass && secs < c.limit_s;
        if (!pass) ++failed;
        char timing[64];
        std::snprintf(timing, sizeof timing, "%.2f s", secs);
        std::printf("criterion %2d %-34s %s  %s [%s%s]\n", c.id, c.name, pass ? "PASS" : "FAIL", o.detail.c_str(),
                    timing, secs < c.limit_s ? "" : ", over time limit");
        std::fflush(stdout);
    }
    return failed;
}
