#include "spavg/scheme.hpp"

#include "spavg/error.hpp"
#include "spavg/numfmt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace spavg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log of T L^2 S e^{L S} given u = ln S; +inf past double range
double log_inner_term(double L, double T, double u) {
    const double S = std::exp(u);
    const double a = u + L * S;
    if (!std::isfinite(a)) return kInf;
    return std::log(T) + 2.0 * std::log(L) + a;
}

// Phi(u) = u + T L + T L^2 S e^{L S}
double phi(double L, double T, double u) {
    const double lt = log_inner_term(L, T, u);
    if (lt > 700.0) return kInf;
    return u + T * L + std::exp(lt);
}

double phi_prime(double L, double T, double u) {
    const double lt = log_inner_term(L, T, u);
    if (lt > 700.0) return kInf;
    return 1.0 + std::exp(lt) * (1.0 + L * std::exp(u));
}

// Shewchuk two-sum: a + b = s + e exactly.
inline void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    const double bv = s - a;
    const double av = s - bv;
    e = (a - av) + (b - bv);
}

// Sign of the exact sum of the terms.
int exact_sum_sign(std::span<const double> terms) {
    std::array<double, 16> exp{};
    std::size_t len = 0;
    for (double b : terms) {
        double q = b;
        for (std::size_t i = 0; i < len; ++i) {
            double s, e;
            two_sum(q, exp[i], s, e);
            exp[i] = e;
            q = s;
        }
        exp[len++] = q;
    }
    for (std::size_t i = len; i-- > 0;)
        if (exp[i] != 0.0) return exp[i] > 0 ? 1 : -1;
    return 0;
}

// k * eps * S <= T, exactly.
bool product_le(double k, double eps, double S, double T) {
    const double p_hi = eps * S;
    const double p_lo = std::fma(eps, S, -p_hi);
    const double q1 = k * p_hi;
    const double e1 = std::fma(k, p_hi, -q1);
    const double q2 = k * p_lo;
    const double e2 = std::fma(k, p_lo, -q2);
    const std::array<double, 5> terms{T, -q1, -e1, -q2, -e2};
    return exact_sum_sign(terms) >= 0;
}

}  // namespace

double seps_log_rhs(double L, double T, double S) {
    require(S > 0.0, "seps_log_rhs: S must be positive");
    return phi(L, T, std::log(S));
}

double seps_residual(double L, double T, double eps, double S) {
    const double c = -0.25 * std::log(eps);
    const double p = seps_log_rhs(L, T, S);
    if (!std::isfinite(p)) return kInf;
    return std::abs(std::expm1(p - c));
}

double solve_seps(double L, double T, double eps) {
    require(L > 0.0 && std::isfinite(L), "solve_seps: L must be positive");
    require(T > 0.0 && std::isfinite(T), "solve_seps: T must be positive");
    require(eps > 0.0 && eps < 1.0, "solve_seps: eps must lie in (0, 1)");
    const double c = -0.25 * std::log(eps);

    // Phi(u) > u + T L, so the root lies below c - T L
    double hi = c - T * L;
    double step = 1.0;
    double lo = hi - step;
    while (phi(L, T, lo) >= c) {
        step *= 2.0;
        lo = hi - step;
        if (step > 1e6) fail(ErrorKind::Numeric, "solve_seps: failed to bracket the root");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-6 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (phi(L, T, mid) >= c)
            hi = mid;
        else
            lo = mid;
    }
    // Phi is convex and increasing: Newton from the upper end descends monotonically.
    double u = hi;
    for (int it = 0; it < 100; ++it) {
        const double r = phi(L, T, u) - c;
        if (r <= 0.0) break;
        const double du = r / phi_prime(L, T, u);
        if (!(du > std::abs(u) * 1e-17 + 1e-300)) break;
        u -= du;
    }
    return std::exp(u);
}

double eps_for_seps(double L, double T, double S) {
    require(S > 0.0, "eps_for_seps: S must be positive");
    return std::exp(-4.0 * seps_log_rhs(L, T, S));
}

std::uint64_t exact_floor_ratio(double T, double eps, double S) {
    require(T > 0.0 && eps > 0.0 && S > 0.0, "exact_floor_ratio: arguments must be positive");
    const double approx = T / (eps * S);
    require(approx < 9.007199254740992e15, "exact_floor_ratio: quotient exceeds 2^53");
    double k = std::floor(approx);
    while (k > 0.0 && !product_le(k, eps, S, T)) k -= 1.0;
    while (product_le(k + 1.0, eps, S, T)) k += 1.0;
    return static_cast<std::uint64_t>(k);
}

double interval_ratio(double eps, double S_eps, double T) { return T / (eps * S_eps); }

namespace {

// Decimal inputs such as eps = 0.1 are stored slightly off their intended value,
// which can move T/(eps S) just below an integer. Quotients within a few ulps
// of an integer are taken as that integer; everything else uses the exact floor.
std::uint64_t snapped_floor(double T, double eps, double S_eps, double ratio) {
    const double k = std::nearbyint(ratio);
    if (k >= 1.0 && std::abs(ratio - k) <= 8.0 * std::numeric_limits<double>::epsilon() * k)
        return static_cast<std::uint64_t>(k);
    return exact_floor_ratio(T, eps, S_eps);
}

}  // namespace

EpsGrid build_time_grid(double eps, double S_eps, double T, std::size_t max_intervals) {
    require(eps > 0.0 && S_eps > 0.0 && T > 0.0, "build_time_grid: eps, S_eps and T must be positive");
    EpsGrid g;
    g.eps = eps;
    g.S_eps = S_eps;
    g.T = T;
    const double width = eps * S_eps;
    if (width >= T) {
        g.degenerate = true;
        g.last_index = snapped_floor(T, eps, S_eps, interval_ratio(eps, S_eps, T));
        g.t_grid = {0.0, T};
        return g;
    }
    const double ratio = interval_ratio(eps, S_eps, T);
    if (!(ratio <= static_cast<double>(max_intervals)))
        fail(ErrorKind::Numeric, "build_time_grid: " + fmt_double(ratio) + " intervals exceed the budget of " +
                                     std::to_string(max_intervals));
    g.last_index = snapped_floor(T, eps, S_eps, ratio);
    g.t_grid.reserve(g.last_index + 2);
    for (std::uint64_t l = 0; l <= g.last_index; ++l) g.t_grid.push_back(static_cast<double>(l) * width);
    // rounding of l*width can reach T for the last knot; keep strictly increasing
    while (g.t_grid.size() > 1 && g.t_grid.back() >= T) g.t_grid.pop_back();
    g.t_grid.push_back(T);
    return g;
}

SchemeRun construct_xi_y(const SystemSpec& sys, const EpsGrid& grid, const Trajectory& z_full, const Vec& x0,
                         const IntegratorConfig& cfg) {
    require(x0.size() == sys.n, "construct_xi_y: x0 dimension mismatch");
    require(z_full.dim() == sys.m, "construct_xi_y: z trajectory dimension mismatch");
    require(z_full.t_begin() <= grid.t_grid.front() && z_full.t_end() >= grid.T * (1 - 1e-12),
            "construct_xi_y: fast trajectory does not cover [0, T]");
    const std::size_t n = sys.n;
    const std::size_t m = sys.m;
    const double eps = grid.eps;

    SchemeRun run;
    run.xi.clock = Clock::Slow;
    run.xi_knots.push_back(x0);
    run.y_pieces.reserve(grid.interval_count());

    for (std::size_t l = 0; l < grid.interval_count(); ++l) {
        const double t0 = grid.t_grid[l];
        const double t1 = grid.t_grid[l + 1];
        const Vec xi_l = run.xi_knots.back();
        const Vec y_l = z_full.at(t0);

        OdeRhs rhs = [&](double, std::span<const double> s, std::span<double> ds) {
            auto y = s.subspan(n, m);
            check_fast_point(sys, y);
            const Vec fv = sys.f(xi_l, y, 0.0);
            const Vec gv = sys.g(xi_l, y, 0.0);
            for (std::size_t k = 0; k < n; ++k) ds[k] = eps * fv[k];
            for (std::size_t k = 0; k < m; ++k) ds[n + k] = gv[k];
        };
        Vec s0 = xi_l;
        s0.insert(s0.end(), y_l.begin(), y_l.end());
        Trajectory piece;
        try {
            piece = solve_ivp(rhs, 0.0, s0, (t1 - t0) / eps, cfg, Clock::Fast);
        } catch (const Error& e) {
            fail(e.kind(), "interval " + std::to_string(l) + ": " + e.what());
        }

        Trajectory y;
        y.clock = Clock::Slow;
        Trajectory xi_piece;
        xi_piece.clock = Clock::Slow;
        const std::size_t N = piece.size();
        for (std::size_t i = 0; i < N; ++i) {
            const double t = i == 0 ? t0 : (i + 1 == N ? t1 : t0 + eps * piece.times[i]);
            const Vec& st = piece.states[i];
            const Vec& dv = piece.derivs[i];
            Vec xs(st.begin(), st.begin() + static_cast<std::ptrdiff_t>(n));
            Vec xd(n);
            for (std::size_t k = 0; k < n; ++k) xd[k] = dv[k] / eps;
            Vec ys(st.begin() + static_cast<std::ptrdiff_t>(n), st.end());
            Vec yd(m);
            for (std::size_t k = 0; k < m; ++k) yd[k] = dv[n + k] / eps;
            if (!(i == 0 && l > 0)) {
                run.xi.times.push_back(t);
                run.xi.states.push_back(xs);
                run.xi.derivs.push_back(xd);
            }
            xi_piece.times.push_back(t);
            xi_piece.states.push_back(xs);
            xi_piece.derivs.push_back(std::move(xd));
            y.times.push_back(t);
            y.states.push_back(std::move(ys));
            y.derivs.push_back(std::move(yd));
            if (i + 1 == N) run.xi_knots.push_back(std::move(xs));
        }
        run.y_pieces.push_back(std::move(y));
        run.xi_pieces.push_back(std::move(xi_piece));
    }
    return run;
}

namespace {

IntervalSignals interval_signal(const Trajectory& x_full, const Trajectory& z_full, const SchemeRun& run,
                                const EpsGrid& grid, std::size_t l, std::size_t K) {
    IntervalSignals s;
    s.l = l;
    s.t_l = grid.t_grid[l];
    s.t_next = grid.t_grid[l + 1];
    const Vec& xi_l = run.xi_knots[l];
    const Trajectory& y = run.y_pieces[l];
    const Trajectory& xi = run.xi_pieces[l];
    for (std::size_t j = 0; j <= K; ++j) {
        const double t = j == K ? s.t_next : s.t_l + (s.t_next - s.t_l) * static_cast<double>(j) / static_cast<double>(K);
        const Vec xv = x_full.at(t);
        const Vec xiv = xi.at(t);
        s.Delta = std::max(s.Delta, dist2(xv, xiv));
        s.d = std::max(s.d, dist2(xv, xi_l));
        s.D = std::max(s.D, dist2(z_full.at(t), y.at(t)));
    }
    return s;
}

}  // namespace

std::vector<IntervalSignals> error_signals(const Trajectory& x_full, const Trajectory& z_full, const SchemeRun& run,
                                           const EpsGrid& grid, std::size_t samples_per_interval) {
    require(samples_per_interval >= 50, "error_signals: need at least 50 samples per interval");
    require(run.y_pieces.size() == grid.interval_count(), "error_signals: scheme run does not match the grid");
    const double slack = 1e-12 * std::max(1.0, grid.T);
    if (x_full.t_begin() > slack || x_full.t_end() < grid.T - slack || z_full.t_begin() > slack ||
        z_full.t_end() < grid.T - slack)
        fail(ErrorKind::Argument, "error_signals: trajectories do not cover [0, T]");
    std::vector<IntervalSignals> out;
    out.reserve(grid.interval_count());
    for (std::size_t l = 0; l < grid.interval_count(); ++l)
        out.push_back(interval_signal(x_full, z_full, run, grid, l, samples_per_interval));
    return out;
}

double refinement_change(const Trajectory& x_full, const Trajectory& z_full, const SchemeRun& run,
                         const EpsGrid& grid, std::size_t samples_per_interval) {
    const auto a = error_signals(x_full, z_full, run, grid, samples_per_interval);
    const auto b = error_signals(x_full, z_full, run, grid, 2 * samples_per_interval);
    auto maxima = [](const std::vector<IntervalSignals>& v) {
        std::array<double, 3> mx{0, 0, 0};
        for (const auto& s : v) {
            mx[0] = std::max(mx[0], s.Delta);
            mx[1] = std::max(mx[1], s.d);
            mx[2] = std::max(mx[2], s.D);
        }
        return mx;
    };
    const auto ma = maxima(a);
    const auto mb = maxima(b);
    double worst = 0.0;
    for (int i = 0; i < 3; ++i)
        if (mb[i] > 0.0) worst = std::max(worst, std::abs(mb[i] - ma[i]) / mb[i]);
    return worst;
}

std::string scheme_csv(const std::vector<IntervalSignals>& signals) {
    std::string out = "l,t_l,Delta_l,d_l,D_l\n";
    for (const auto& s : signals)
        out += std::to_string(s.l) + "," + fmt_double(s.t_l) + "," + fmt_double(s.Delta) + "," + fmt_double(s.d) +
               "," + fmt_double(s.D) + "\n";
    return out;
}

const char* method_name(SignalSummary::Method m) noexcept {
    return m == SignalSummary::Method::Intervals ? "intervals" : "continuum-limit";
}

namespace {

double max_delta_on_grid(const SystemSpec& sys, const EpsGrid& grid, const FullSolution& full, const Vec& x0,
                         const IntegratorConfig& cfg, SignalSummary* into) {
    const SchemeRun run = construct_xi_y(sys, grid, full.z, x0, cfg);
    const auto sig = error_signals(full.x, full.z, run, grid);
    double dmax = 0.0;
    for (const auto& s : sig) {
        dmax = std::max(dmax, s.Delta);
        if (into) {
            into->Delta_max = std::max(into->Delta_max, s.Delta);
            into->d_max = std::max(into->d_max, s.d);
            into->D_max = std::max(into->D_max, s.D);
        }
    }
    return dmax;
}

}  // namespace

SignalSummary scheme_signal_summary(const SystemSpec& sys, double eps, double S_eps, double T, const Vec& x0,
                                    const Vec& z0, const FullSolution& full, const IntegratorConfig& cfg,
                                    std::size_t max_intervals, std::vector<std::size_t> coarse_counts) {
    SignalSummary out;
    out.intervals = interval_ratio(eps, S_eps, T);
    if (out.intervals <= static_cast<double>(max_intervals)) {
        out.method = SignalSummary::Method::Intervals;
        const EpsGrid grid = build_time_grid(eps, S_eps, T, max_intervals);
        max_delta_on_grid(sys, grid, full, x0, cfg, &out);
        return out;
    }

    out.method = SignalSummary::Method::ContinuumLimit;
    const std::size_t n = sys.n;
    const std::size_t m = sys.m;
    // stacked (x, z, xi) in fast time
    OdeRhs rhs = [&](double, std::span<const double> s, std::span<double> ds) {
        auto x = s.first(n);
        auto z = s.subspan(n, m);
        auto xi = s.subspan(n + m, n);
        check_fast_point(sys, z);
        const Vec fx = sys.f(x, z, eps);
        const Vec gz = sys.g(x, z, eps);
        const Vec fxi = sys.f(xi, z, 0.0);
        for (std::size_t k = 0; k < n; ++k) ds[k] = eps * fx[k];
        for (std::size_t k = 0; k < m; ++k) ds[n + k] = gz[k];
        for (std::size_t k = 0; k < n; ++k) ds[n + m + k] = eps * fxi[k];
    };
    Vec s0 = x0;
    s0.insert(s0.end(), z0.begin(), z0.end());
    s0.insert(s0.end(), x0.begin(), x0.end());
    const Trajectory joint = solve_ivp(rhs, 0.0, s0, T / eps, cfg, Clock::Fast);

    double f_xi_sup = 0.0;
    double g_full_sup = 0.0;
    double g_frozen_sup = 0.0;
    auto visit = [&](const Vec& s) {
        std::span<const double> sv(s);
        auto x = sv.first(n);
        auto z = sv.subspan(n, m);
        auto xi = sv.subspan(n + m, n);
        out.Delta_max = std::max(out.Delta_max, dist2(x, xi));
        f_xi_sup = std::max(f_xi_sup, norm2(sys.f(xi, z, 0.0)));
        g_full_sup = std::max(g_full_sup, norm2(sys.g(x, z, eps)));
        g_frozen_sup = std::max(g_frozen_sup, norm2(sys.g(xi, z, 0.0)));
    };
    for (std::size_t i = 0; i < joint.size(); ++i) {
        visit(joint.states[i]);
        if (i + 1 < joint.size()) visit(joint.at(0.5 * (joint.times[i] + joint.times[i + 1])));
    }
    out.d_max = out.Delta_max + eps * S_eps * f_xi_sup;
    out.D_max = S_eps * (g_full_sup + g_frozen_sup);

    for (std::size_t N : coarse_counts) {
        const double S_coarse = T / (static_cast<double>(N) * eps);
        const EpsGrid grid = build_time_grid(eps, S_coarse, T, 2 * N + 2);
        out.coarse_Delta.emplace_back(grid.interval_count(), max_delta_on_grid(sys, grid, full, x0, cfg, nullptr));
    }
    return out;
}

}  // namespace spavg
