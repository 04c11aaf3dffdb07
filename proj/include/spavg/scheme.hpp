#pragma once

#include "spavg/integrate.hpp"
#include "spavg/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace spavg {

/// ln(S) + T L (1 + S L e^{L S}), the log of the right side of the interval
/// length equation. +inf once the inner exponential leaves double range.
[[nodiscard]] double seps_log_rhs(double L, double T, double S);

/// Relative residual |eps^{-1/4} - S e^{T L (1 + S L e^{L S})}| / eps^{-1/4},
/// evaluated through the logarithm.
[[nodiscard]] double seps_residual(double L, double T, double eps, double S);

/// Unique positive root S of eps^{-1/4} = S exp(T L (1 + S L e^{L S})).
/// Solved for u = ln S by bracketing, bisection and a Newton polish.
[[nodiscard]] double solve_seps(double L, double T, double eps);

/// Inverse of solve_seps: the eps whose root is S (closed form).
[[nodiscard]] double eps_for_seps(double L, double T, double S);

/// floor(T / (eps * S)) computed exactly for the real product eps*S of the
/// two doubles. Requires the quotient to be below 2^53.
[[nodiscard]] std::uint64_t exact_floor_ratio(double T, double eps, double S);

/// Knots 0 = t_0 < t_1 < ... = T with spacing eps*S_eps, last interval possibly
/// shorter. `last_index` is floor(T/(eps S_eps)), the largest index in I_eps;
/// quotients within a few ulps of an integer count as that integer.
struct EpsGrid {
    double eps = 0.0;
    double S_eps = 0.0;
    double T = 0.0;
    std::vector<double> t_grid;
    std::uint64_t last_index = 0;
    bool degenerate = false;  // eps*S_eps >= T: single interval [0, T]

    [[nodiscard]] std::size_t interval_count() const noexcept { return t_grid.size() - 1; }
};

/// Throws Error(Numeric) when the grid would need more than `max_intervals`.
[[nodiscard]] EpsGrid build_time_grid(double eps, double S_eps, double T, std::size_t max_intervals = 4'000'000);

/// T / (eps S_eps) as a double; usable when the exact floor overflows.
[[nodiscard]] double interval_ratio(double eps, double S_eps, double T);

struct IntervalSignals {
    std::size_t l = 0;
    double t_l = 0.0;
    double t_next = 0.0;
    double Delta = 0.0;  // max |x - xi| on the interval
    double d = 0.0;      // max |x - xi_l|
    double D = 0.0;      // max |z - y|
};

/// Piecewise approximants: on each interval y solves eps y' = g(xi_l, y, 0)
/// from y(t_l) = z(t_l), and xi(t) = xi_l + int f(xi_l, y, 0).
struct SchemeRun {
    Trajectory xi;                     // assembled, continuous across knots
    std::vector<Trajectory> xi_pieces;  // one per interval, slow time
    std::vector<Trajectory> y_pieces;   // one per interval, slow time
    std::vector<Vec> xi_knots;        // xi_l, l = 0..interval_count
};

[[nodiscard]] SchemeRun construct_xi_y(const SystemSpec& sys, const EpsGrid& grid, const Trajectory& z_full,
                                       const Vec& x0, const IntegratorConfig& cfg);

/// Running maxima per interval, sampled on `samples_per_interval` (>= 50)
/// evenly spaced points plus both ends.
[[nodiscard]] std::vector<IntervalSignals> error_signals(const Trajectory& x_full, const Trajectory& z_full,
                                                         const SchemeRun& run, const EpsGrid& grid,
                                                         std::size_t samples_per_interval = 64);

/// Largest relative change of max_l Delta_l, d_l, D_l when the per-interval
/// sampling is doubled.
[[nodiscard]] double refinement_change(const Trajectory& x_full, const Trajectory& z_full, const SchemeRun& run,
                                       const EpsGrid& grid, std::size_t samples_per_interval = 64);

/// `l,t_l,Delta_l,d_l,D_l`
[[nodiscard]] std::string scheme_csv(const std::vector<IntervalSignals>& signals);

/// Worst-case signals over the whole horizon.
struct SignalSummary {
    enum class Method { Intervals, ContinuumLimit };
    Method method = Method::Intervals;
    double intervals = 0.0;  // T/(eps S_eps)
    double Delta_max = 0.0;
    double d_max = 0.0;
    double D_max = 0.0;
    /// For ContinuumLimit: max Delta on literal partitions with these many intervals.
    std::vector<std::pair<std::size_t, double>> coarse_Delta;
};

[[nodiscard]] const char* method_name(SignalSummary::Method m) noexcept;

/// Evaluates the interval signals on the eps grid when it has at most
/// `max_intervals` intervals. Otherwise eps*S_eps is far below what any
/// partition of [0,T] can hold, and the signals are evaluated in the
/// eps*S_eps -> 0 limit: xi solves xi' = f(xi, z(t), 0) alongside the full
/// system, Delta_max = sup |x - xi|, d_max = Delta_max + eps S sup|f(xi,z,0)|,
/// D_max = S (sup|g(x,z,eps)| + sup|g(xi,z,0)|) (growth of z - y over one
/// interval of fast length S). Literal partitions with `coarse_counts`
/// intervals are evaluated alongside to show Delta converging to the limit.
[[nodiscard]] SignalSummary scheme_signal_summary(const SystemSpec& sys, double eps, double S_eps, double T,
                                                  const Vec& x0, const Vec& z0, const FullSolution& full,
                                                  const IntegratorConfig& cfg,
                                                  std::size_t max_intervals = 200'000,
                                                  std::vector<std::size_t> coarse_counts = {500, 1000, 2000});

}  // namespace spavg
