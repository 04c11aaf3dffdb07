#include "spavg/averaging.hpp"

#include "spavg/error.hpp"
#include "spavg/numfmt.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace spavg {

const char* window_name(AverageWindow w) noexcept { return w == AverageWindow::Uniform ? "uniform" : "bump"; }

namespace {

// Weights for nodes k = 0..N on [0, T], summing to one.
std::vector<double> window_weights(AverageWindow window, std::size_t N) {
    std::vector<double> w(N + 1, 0.0);
    if (window == AverageWindow::Uniform) {
        for (std::size_t k = 0; k <= N; ++k) w[k] = (k == 0 || k == N) ? 0.5 : 1.0;
    } else {
        for (std::size_t k = 1; k < N; ++k) {
            const double u = static_cast<double>(k) / static_cast<double>(N);
            w[k] = std::exp(-1.0 / (u * (1.0 - u)));
        }
    }
    double total = 0.0;
    for (double v : w) total += v;
    for (double& v : w) v /= total;
    return w;
}

// Weights sum to one; accumulating offsets from the first value keeps a
// constant integrand exact.
Vec weighted_mean(const std::vector<Vec>& values, const std::vector<double>& w, std::size_t count) {
    const Vec& base = values.front();
    Vec acc(base.size(), 0.0);
    for (std::size_t k = 1; k < count; ++k)
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w[k] * (values[k][i] - base[i]);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += base[i];
    return acc;
}

}  // namespace

AverageResult compute_fav(const SystemSpec& sys, const Vec& x, const Vec& z0, double T_av,
                          const IntegratorConfig& cfg, const AverageOptions& opts) {
    require(T_av > 0.0, "compute_fav: T_av must be positive");
    require(opts.max_dtau > 0.0, "compute_fav: max_dtau must be positive");
    const Trajectory bl = integrate_boundary_layer(sys, x, z0, T_av, cfg);

    // even node count so the half horizon reuses the first N/2 + 1 nodes
    std::size_t half = static_cast<std::size_t>(std::ceil(T_av / (2.0 * opts.max_dtau)));
    half = std::max<std::size_t>(half, 2);
    const std::size_t N = 2 * half;
    std::vector<Vec> integrand(N + 1);
    for (std::size_t k = 0; k <= N; ++k) {
        const double tau = k == N ? T_av : T_av * static_cast<double>(k) / static_cast<double>(N);
        integrand[k] = sys.f(x, bl.at(tau), 0.0);
    }

    AverageResult res;
    res.x = x;
    res.T_av = T_av;
    res.f_av = weighted_mean(integrand, window_weights(opts.window, N), N + 1);
    const Vec half_avg = weighted_mean(integrand, window_weights(opts.window, half), half + 1);
    res.cauchy_gap = dist2(res.f_av, half_avg);
    return res;
}

std::vector<WellDefinedDiagnostic> check_average_well_defined(const SystemSpec& sys,
                                                              const std::vector<Vec>& x_samples,
                                                              const std::vector<Vec>& z0_samples, double T_av,
                                                              double tol, const IntegratorConfig& cfg,
                                                              AverageOptions opts) {
    require(!z0_samples.empty(), "check_average_well_defined: need at least one z0 sample");
    std::vector<WellDefinedDiagnostic> out;
    out.reserve(x_samples.size());
    for (const Vec& x : x_samples) {
        WellDefinedDiagnostic d;
        d.x = x;
        for (const Vec& z0 : z0_samples) d.averages.push_back(compute_fav(sys, x, z0, T_av, cfg, opts).f_av);
        for (std::size_t i = 0; i < d.averages.size(); ++i)
            for (std::size_t j = i + 1; j < d.averages.size(); ++j)
                d.z0_spread = std::max(d.z0_spread, dist2(d.averages[i], d.averages[j]));
        d.pass = d.z0_spread <= tol;
        out.push_back(std::move(d));
    }
    return out;
}

double GammaEnvelope::at(double s) const {
    require(!s_grid.empty(), "gamma envelope is empty");
    const double lo = s_grid.front();
    const double hi = s_grid.back();
    if (s < lo * (1 - 1e-12) || s > hi * (1 + 1e-12))
        fail(ErrorKind::Argument, "extend s_grid: s = " + fmt_double(s) + " outside [" + fmt_double(lo) + ", " +
                                      fmt_double(hi) + "]");
    s = std::clamp(s, lo, hi);
    auto it = std::upper_bound(s_grid.begin(), s_grid.end(), s);
    std::size_t i = it == s_grid.begin() ? 0 : static_cast<std::size_t>(it - s_grid.begin()) - 1;
    if (i + 1 >= s_grid.size()) return gamma_hat.back();
    const double g0 = gamma_hat[i];
    const double g1 = gamma_hat[i + 1];
    if (g0 > 0.0 && g1 > 0.0) {
        const double u = std::log(s / s_grid[i]) / std::log(s_grid[i + 1] / s_grid[i]);
        return std::exp(std::log(g0) + u * (std::log(g1) - std::log(g0)));
    }
    const double u = (s - s_grid[i]) / (s_grid[i + 1] - s_grid[i]);
    return g0 + u * (g1 - g0);
}

GammaEnvelope estimate_gamma(const SystemSpec& sys, const SlowField& f_av, const std::vector<Vec>& x_samples,
                             const std::vector<Vec>& z0_samples, const std::vector<double>& s_grid,
                             const std::vector<double>& tau_prime_samples, const IntegratorConfig& cfg,
                             double max_dtau) {
    require(!s_grid.empty(), "estimate_gamma: empty s_grid");
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
        require(s_grid[i] > 0.0, "estimate_gamma: s_grid must be positive");
        if (i) require(s_grid[i] > s_grid[i - 1], "estimate_gamma: s_grid must be increasing");
    }
    require(!tau_prime_samples.empty(), "estimate_gamma: need at least one tau' sample");
    for (double tp : tau_prime_samples) require(tp >= 0.0, "estimate_gamma: tau' must be nonnegative");

    GammaEnvelope env;
    env.s_grid = s_grid;
    env.gamma_hat.assign(s_grid.size(), 0.0);
    env.s_star = s_grid.front();
    const double tau_end = *std::max_element(tau_prime_samples.begin(), tau_prime_samples.end()) + s_grid.back();

    for (const Vec& x : x_samples) {
        const Vec fav = f_av(x);
        for (const Vec& z0 : z0_samples) {
            const Trajectory bl = integrate_boundary_layer(sys, x, z0, tau_end, cfg);
            for (double tp : tau_prime_samples) {
                for (std::size_t j = 0; j < s_grid.size(); ++j) {
                    const double s = s_grid[j];
                    const std::size_t N = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(s / max_dtau)));
                    const double h = s / static_cast<double>(N);
                    Vec acc(fav.size(), 0.0);
                    for (std::size_t k = 0; k <= N; ++k) {
                        const double tau = k == N ? tp + s : tp + h * static_cast<double>(k);
                        const Vec fv = sys.f(x, bl.at(std::min(tau, tau_end)), 0.0);
                        const double w = (k == 0 || k == N) ? 0.5 * h : h;
                        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * (fv[i] - fav[i]);
                    }
                    env.gamma_hat[j] = std::max(env.gamma_hat[j], norm2(acc) / s);
                }
            }
        }
    }
    return env;
}

std::string gamma_csv(const GammaEnvelope& env) {
    std::string out = "s,gamma_hat\n";
    for (std::size_t i = 0; i < env.s_grid.size(); ++i)
        out += fmt_double(env.s_grid[i]) + "," + fmt_double(env.gamma_hat[i]) + "\n";
    return out;
}

SlowField build_fav_field(const SystemSpec& sys, const Vec& z0_ref, double T_av, const IntegratorConfig& cfg,
                          AverageOptions opts) {
    require(T_av > 0.0, "build_fav_field: T_av must be positive");
    struct Memo {
        std::mutex mu;
        std::map<std::vector<std::uint64_t>, Vec> table;
    };
    auto memo = std::make_shared<Memo>();
    return [sys, z0_ref, T_av, cfg, opts, memo](std::span<const double> x) {
        std::vector<std::uint64_t> key(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) key[i] = std::bit_cast<std::uint64_t>(x[i]);
        {
            std::lock_guard lock(memo->mu);
            auto it = memo->table.find(key);
            if (it != memo->table.end()) return it->second;
        }
        Vec v = compute_fav(sys, Vec(x.begin(), x.end()), z0_ref, T_av, cfg, opts).f_av;
        std::lock_guard lock(memo->mu);
        return memo->table.emplace(std::move(key), std::move(v)).first->second;
    };
}

}  // namespace spavg
