#pragma once

#include "spavg/model.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spavg {

enum class Clock { Slow, Fast };

[[nodiscard]] const char* clock_name(Clock c) noexcept;

/// Time-stamped samples of one integration run. When `derivs` is filled (one
/// entry per sample, derivative with respect to the trajectory's own clock),
/// `at()` uses cubic Hermite interpolation between samples.
struct Trajectory {
    Clock clock = Clock::Slow;
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<Vec> derivs;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] std::size_t dim() const noexcept { return states.empty() ? 0 : states.front().size(); }
    [[nodiscard]] double t_begin() const { return times.front(); }
    [[nodiscard]] double t_end() const { return times.back(); }
    [[nodiscard]] const Vec& final_state() const { return states.back(); }

    /// Dense output on [t_begin, t_end]; throws Error(Argument) outside.
    [[nodiscard]] Vec at(double t) const;

    /// Throws if times are not strictly increasing or any state is non-finite.
    void validate() const;
};

/// `clock,t,state_0,...,state_{k-1}` with shortest round-trip numbers.
[[nodiscard]] std::string trajectory_csv(const Trajectory& traj);

enum class Method { Rk4Fixed, Rk45Adaptive };

/// All step quantities are in units of the clock the integration runs on.
struct IntegratorConfig {
    Method method = Method::Rk45Adaptive;
    double h = 0.01;          // fixed step for rk4, initial step for rk45
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    long max_steps = 50'000'000;
    double max_step = 0.05;   // caps accepted steps so dense output stays accurate

    void validate() const;
};

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;
/// Called on every accepted state; throw to abort the run.
using StepGuard = std::function<void(double t, std::span<const double> y)>;

/// Generic explicit Runge-Kutta driver (classical RK4 or Dormand-Prince 5(4)).
[[nodiscard]] Trajectory solve_ivp(const OdeRhs& rhs, double t0, const Vec& y0, double t_end,
                                   const IntegratorConfig& cfg, Clock clock, const StepGuard& guard = {});

struct FullSolution {
    Trajectory x;  // slow time
    Trajectory z;  // slow time
};

/// Integrates the full system on [0, T]. Internally the run is carried out in
/// fast time tau = t/eps on the stacked state (x, z); `cfg` steps are in tau.
/// When `dom` is given, leaving B_R(0) x M raises DomainError with the first
/// exit time.
[[nodiscard]] FullSolution integrate_full(const SystemSpec& sys, const Vec& x0, const Vec& z0, double eps, double T,
                                          const IntegratorConfig& cfg, const DomainSpec* dom = nullptr);

/// dz/dtau = g(x_frozen, z, 0) on [0, tau_end].
[[nodiscard]] Trajectory integrate_boundary_layer(const SystemSpec& sys, const Vec& x_frozen, const Vec& z0,
                                                  double tau_end, const IntegratorConfig& cfg);

/// x' = f_av(x) on [0, T].
[[nodiscard]] Trajectory integrate_reduced(const SlowField& f_av, const Vec& x0, double T,
                                           const IntegratorConfig& cfg);

/// First time at which a trajectory pair leaves B_R(0) x M, if any.
[[nodiscard]] std::optional<double> first_domain_exit(const Trajectory& x, const Trajectory& z,
                                                      const DomainSpec& dom);

}  // namespace spavg
