#include "spavg/integrate.hpp"

#include "spavg/error.hpp"
#include "spavg/numfmt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spavg {

const char* clock_name(Clock c) noexcept { return c == Clock::Slow ? "slow" : "fast"; }

Vec Trajectory::at(double t) const {
    if (times.empty()) fail(ErrorKind::Argument, "empty trajectory");
    const double span = t_end() - t_begin();
    const double slack = 1e-12 * std::max(1.0, std::abs(span));
    if (t < t_begin() - slack || t > t_end() + slack)
        fail(ErrorKind::Argument, "dense output requested at t = " + fmt_double(t) + " outside [" +
                                      fmt_double(t_begin()) + ", " + fmt_double(t_end()) + "]");
    t = std::clamp(t, t_begin(), t_end());
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t i = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
    if (i + 1 >= times.size()) return states.back();
    const double t0 = times[i];
    const double h = times[i + 1] - t0;
    const double s = (t - t0) / h;
    const Vec& y0 = states[i];
    const Vec& y1 = states[i + 1];
    Vec out(y0.size());
    if (derivs.size() == times.size()) {
        const Vec& d0 = derivs[i];
        const Vec& d1 = derivs[i + 1];
        const double s2 = s * s;
        const double s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1;
        const double h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2;
        const double h11 = s3 - s2;
        for (std::size_t k = 0; k < out.size(); ++k)
            out[k] = h00 * y0[k] + h10 * h * d0[k] + h01 * y1[k] + h11 * h * d1[k];
    } else {
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = y0[k] + s * (y1[k] - y0[k]);
    }
    return out;
}

void Trajectory::validate() const {
    if (times.size() != states.size()) fail(ErrorKind::Numeric, "trajectory: times/states length mismatch");
    if (!derivs.empty() && derivs.size() != times.size())
        fail(ErrorKind::Numeric, "trajectory: derivs length mismatch");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) fail(ErrorKind::Numeric, "trajectory: times not strictly increasing");
    for (const auto& s : states)
        for (double c : s)
            if (!std::isfinite(c)) fail(ErrorKind::Numeric, "trajectory: non-finite state");
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "clock,t";
    for (std::size_t k = 0; k < traj.dim(); ++k) out += ",state_" + std::to_string(k);
    out += '\n';
    const char* clock = clock_name(traj.clock);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out += clock;
        out += ',';
        out += fmt_double(traj.times[i]);
        out += ',';
        out += join_csv(traj.states[i]);
        out += '\n';
    }
    return out;
}

void IntegratorConfig::validate() const {
    require(h > 0.0 && std::isfinite(h), "integrator: h must be positive");
    require(rel_tol > 0.0 && abs_tol > 0.0, "integrator: tolerances must be positive");
    require(max_steps >= 1, "integrator: max_steps must be >= 1");
    require(max_step > 0.0, "integrator: max_step must be positive");
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Workspace {
    explicit Workspace(std::size_t n) : k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n) {}
    Vec k1, k2, k3, k4, k5, k6, k7, tmp, ynew;
};

void check_finite(std::span<const double> y, double t) {
    for (double c : y)
        if (!std::isfinite(c)) fail(ErrorKind::Numeric, "non-finite state at t = " + fmt_double(t));
}

class Recorder {
public:
    Recorder(Clock clock, const StepGuard& guard) : guard_(guard) { traj_.clock = clock; }
    void push(double t, const Vec& y, const Vec& dy) {
        check_finite(y, t);
        if (guard_) guard_(t, y);
        traj_.times.push_back(t);
        traj_.states.push_back(y);
        traj_.derivs.push_back(dy);
    }
    Trajectory take() { return std::move(traj_); }

private:
    const StepGuard& guard_;
    Trajectory traj_;
};

Trajectory run_rk4(const OdeRhs& rhs, double t0, const Vec& y0, double t_end, const IntegratorConfig& cfg,
                   Clock clock, const StepGuard& guard) {
    const std::size_t n = y0.size();
    Workspace w(n);
    Recorder rec(clock, guard);
    Vec y = y0;
    double t = t0;
    rhs(t, y, w.k1);
    rec.push(t, y, w.k1);
    const double span = t_end - t0;
    const long n_steps = static_cast<long>(std::ceil(span / cfg.h - 1e-9));
    if (n_steps > cfg.max_steps) fail(ErrorKind::Numeric, "step-count exhaustion: rk4 needs more than max_steps");
    for (long i = 0; i < n_steps; ++i) {
        const double t_next = (i + 1 == n_steps) ? t_end : t0 + static_cast<double>(i + 1) * cfg.h;
        const double h = t_next - t;
        for (std::size_t k = 0; k < n; ++k) w.tmp[k] = y[k] + 0.5 * h * w.k1[k];
        rhs(t + 0.5 * h, w.tmp, w.k2);
        for (std::size_t k = 0; k < n; ++k) w.tmp[k] = y[k] + 0.5 * h * w.k2[k];
        rhs(t + 0.5 * h, w.tmp, w.k3);
        for (std::size_t k = 0; k < n; ++k) w.tmp[k] = y[k] + h * w.k3[k];
        rhs(t + h, w.tmp, w.k4);
        for (std::size_t k = 0; k < n; ++k) y[k] += h / 6.0 * (w.k1[k] + 2 * w.k2[k] + 2 * w.k3[k] + w.k4[k]);
        t = t_next;
        rhs(t, y, w.k1);
        rec.push(t, y, w.k1);
    }
    return rec.take();
}

Trajectory run_dopri5(const OdeRhs& rhs, double t0, const Vec& y0, double t_end, const IntegratorConfig& cfg,
                      Clock clock, const StepGuard& guard) {
    const std::size_t n = y0.size();
    Workspace w(n);
    Recorder rec(clock, guard);
    Vec y = y0;
    double t = t0;
    rhs(t, y, w.k1);
    rec.push(t, y, w.k1);
    double h = std::min({cfg.h, cfg.max_step, t_end - t0});
    bool last_rejected = false;
    long steps = 0;
    while (t < t_end) {
        if (++steps > cfg.max_steps)
            fail(ErrorKind::Numeric, "step-count exhaustion after " + std::to_string(cfg.max_steps) +
                                         " steps at t = " + fmt_double(t));
        bool final_step = false;
        if (t + h >= t_end || t_end - (t + h) < 1e-12 * std::max(1.0, std::abs(t_end))) {
            h = t_end - t;
            final_step = true;
        }
        if (h <= 16 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
            fail(ErrorKind::Numeric, "step size underflow at t = " + fmt_double(t));

        auto stage = [&](Vec& out, double ct, auto&&... terms) {
            for (std::size_t k = 0; k < n; ++k) w.tmp[k] = y[k] + h * (... + (terms.first * (*terms.second)[k]));
            rhs(t + ct * h, w.tmp, out);
        };
        using P = std::pair<double, const Vec*>;
        stage(w.k2, c2, P{a21, &w.k1});
        stage(w.k3, c3, P{a31, &w.k1}, P{a32, &w.k2});
        stage(w.k4, c4, P{a41, &w.k1}, P{a42, &w.k2}, P{a43, &w.k3});
        stage(w.k5, c5, P{a51, &w.k1}, P{a52, &w.k2}, P{a53, &w.k3}, P{a54, &w.k4});
        stage(w.k6, 1.0, P{a61, &w.k1}, P{a62, &w.k2}, P{a63, &w.k3}, P{a64, &w.k4}, P{a65, &w.k5});
        for (std::size_t k = 0; k < n; ++k)
            w.ynew[k] = y[k] + h * (b1 * w.k1[k] + b3 * w.k3[k] + b4 * w.k4[k] + b5 * w.k5[k] + b6 * w.k6[k]);
        const double t_new = final_step ? t_end : t + h;
        rhs(t_new, w.ynew, w.k7);

        double err = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double ek = h * (e1 * w.k1[k] + e3 * w.k3[k] + e4 * w.k4[k] + e5 * w.k5[k] + e6 * w.k6[k] +
                                   e7 * w.k7[k]);
            const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[k]), std::abs(w.ynew[k]));
            err += (ek / sc) * (ek / sc);
        }
        err = std::sqrt(err / static_cast<double>(n));
        if (!std::isfinite(err)) err = 1e10;

        if (err <= 1.0) {
            t = t_new;
            y = w.ynew;
            std::swap(w.k1, w.k7);
            rec.push(t, y, w.k1);
            double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            if (last_rejected) fac = std::min(fac, 1.0);
            h = std::min(h * fac, cfg.max_step);
            last_rejected = false;
        } else {
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
            last_rejected = true;
        }
    }
    return rec.take();
}

// Re-raises domain errors raised inside a right-hand side with the current time.
OdeRhs with_time_on_domain_error(const OdeRhs& rhs) {
    return [&rhs](double t, std::span<const double> y, std::span<double> dy) {
        try {
            rhs(t, y, dy);
        } catch (const DomainError& e) {
            if (e.time() != 0.0) throw;
            throw DomainError(std::string(e.what()) + " (t = " + fmt_double(t) + ")", e.point(), t);
        }
    };
}

}  // namespace

Trajectory solve_ivp(const OdeRhs& rhs, double t0, const Vec& y0, double t_end, const IntegratorConfig& cfg,
                     Clock clock, const StepGuard& guard) {
    cfg.validate();
    require(t_end > t0, "solve_ivp: t_end must exceed t0");
    require(!y0.empty(), "solve_ivp: empty initial state");
    check_finite(y0, t0);
    const OdeRhs wrapped = with_time_on_domain_error(rhs);
    return cfg.method == Method::Rk4Fixed ? run_rk4(wrapped, t0, y0, t_end, cfg, clock, guard)
                                          : run_dopri5(wrapped, t0, y0, t_end, cfg, clock, guard);
}

FullSolution integrate_full(const SystemSpec& sys, const Vec& x0, const Vec& z0, double eps, double T,
                            const IntegratorConfig& cfg, const DomainSpec* dom) {
    require(eps > 0.0, "integrate_full: eps must be positive");
    require(T > 0.0, "integrate_full: T must be positive");
    require(x0.size() == sys.n && z0.size() == sys.m, "integrate_full: dimension mismatch");
    if (dom) require(eps <= dom->eps1, "integrate_full: eps exceeds eps1 of the domain");
    check_fast_point(sys, z0);
    const std::size_t n = sys.n;
    const std::size_t m = sys.m;

    // fast time: dx/dtau = eps f, dz/dtau = g
    OdeRhs rhs = [&](double, std::span<const double> y, std::span<double> dy) {
        auto x = y.first(n);
        auto z = y.subspan(n, m);
        check_fast_point(sys, z);
        const Vec fx = sys.f(x, z, eps);
        const Vec gz = sys.g(x, z, eps);
        for (std::size_t k = 0; k < n; ++k) dy[k] = eps * fx[k];
        for (std::size_t k = 0; k < m; ++k) dy[n + k] = gz[k];
    };
    StepGuard guard = [&](double tau, std::span<const double> y) {
        auto z = y.subspan(n, m);
        if (sys.excluded && sys.excluded->contains(z))
            throw DomainError("excluded region hit at t = " + fmt_double(tau * eps), Vec(y.begin(), y.end()),
                              tau * eps);
        if (dom) {
            constexpr double slack = 1e-9;
            if (!dom->slow_contains(y.first(n), slack) || !dom->M.contains(z, slack))
                throw DomainError("trajectory left B_R(0) x M at t = " + fmt_double(tau * eps),
                                  Vec(y.begin(), y.end()), tau * eps);
        }
    };
    Vec y0(x0);
    y0.insert(y0.end(), z0.begin(), z0.end());
    Trajectory joint = solve_ivp(rhs, 0.0, y0, T / eps, cfg, Clock::Fast, guard);

    FullSolution out;
    out.x.clock = out.z.clock = Clock::Slow;
    const std::size_t N = joint.size();
    out.x.times.resize(N);
    out.z.times.resize(N);
    out.x.states.resize(N);
    out.z.states.resize(N);
    out.x.derivs.resize(N);
    out.z.derivs.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double t = i + 1 == N ? T : joint.times[i] * eps;
        out.x.times[i] = out.z.times[i] = t;
        const Vec& s = joint.states[i];
        const Vec& d = joint.derivs[i];
        out.x.states[i].assign(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n));
        out.z.states[i].assign(s.begin() + static_cast<std::ptrdiff_t>(n), s.end());
        out.x.derivs[i].resize(n);
        out.z.derivs[i].resize(m);
        for (std::size_t k = 0; k < n; ++k) out.x.derivs[i][k] = d[k] / eps;
        for (std::size_t k = 0; k < m; ++k) out.z.derivs[i][k] = d[n + k] / eps;
    }
    return out;
}

Trajectory integrate_boundary_layer(const SystemSpec& sys, const Vec& x_frozen, const Vec& z0, double tau_end,
                                    const IntegratorConfig& cfg) {
    require(tau_end > 0.0, "integrate_boundary_layer: tau_end must be positive");
    require(x_frozen.size() == sys.n && z0.size() == sys.m, "integrate_boundary_layer: dimension mismatch");
    check_fast_point(sys, z0);
    OdeRhs rhs = [&](double, std::span<const double> z, std::span<double> dz) {
        check_fast_point(sys, z);
        const Vec gz = sys.g(x_frozen, z, 0.0);
        std::copy(gz.begin(), gz.end(), dz.begin());
    };
    return solve_ivp(rhs, 0.0, z0, tau_end, cfg, Clock::Fast);
}

Trajectory integrate_reduced(const SlowField& f_av, const Vec& x0, double T, const IntegratorConfig& cfg) {
    require(T > 0.0, "integrate_reduced: T must be positive");
    require(static_cast<bool>(f_av), "integrate_reduced: average field is empty");
    OdeRhs rhs = [&](double, std::span<const double> x, std::span<double> dx) {
        const Vec v = f_av(x);
        std::copy(v.begin(), v.end(), dx.begin());
    };
    return solve_ivp(rhs, 0.0, x0, T, cfg, Clock::Slow);
}

std::optional<double> first_domain_exit(const Trajectory& x, const Trajectory& z, const DomainSpec& dom) {
    constexpr double slack = 1e-9;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!dom.slow_contains(x.states[i], slack) || !dom.M.contains(z.states[i], slack)) return x.times[i];
    return std::nullopt;
}

}  // namespace spavg
