#pragma once

#include "spavg/bounds.hpp"
#include "spavg/integrate.hpp"
#include "spavg/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace spavg {

struct SweepRow {
    double eps = 0.0;
    double sup_x_err = 0.0;  // sup_t |x - x_av|
    double sup_z_gap = 0.0;  // sup_{t >= t_a} | |z(t)|_eta - |phi_b(t/eps)|_eta |
    double log_K = 0.0;
    double log_F = 0.0;      // nan when F is undefined at this eps
    std::string status = "ok";
    double wall_ms = 0.0;    // 0 unless timing was requested
    std::string detail;      // failure message, not serialized
};

struct SweepResult {
    std::vector<SweepRow> rows;  // ordered by decreasing eps
    std::uint64_t seed = 42;
};

struct SweepOptions {
    double T = 10.0;
    double t_a = 1.0;
    std::size_t min_points = 2000;
    bool timing = false;
};

/// For each eps: full system, boundary layer from (x0, z0) and reduced system,
/// compared on a shared uniform grid of max(min_points, 4T/eps) points. The
/// reduced system uses `f_av` when given, else the system's closed form.
/// Sub-run failures mark the row and the sweep continues.
[[nodiscard]] SweepResult closeness_sweep(const SystemBundle& b, const Vec& x0, const Vec& z0,
                                          const std::vector<double>& eps_list, const IntegratorConfig& cfg,
                                          const ConstantSet& c, const SweepOptions& opts,
                                          const SlowField& f_av = {});

/// `# seed = ...` then `eps,sup_x_err,sup_z_gap,log_K,log_F,status,wall_ms`.
[[nodiscard]] std::string sweep_csv(const SweepResult& r);

enum class SweepColumn { SupXErr, SupZGap };

struct OrderFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t used = 0;
    std::size_t dropped = 0;  // rows with non-positive error
    bool supported = false;   // slope >= 0.45
};

/// Least squares of ln(err) against ln(eps) over successful rows. Needs at
/// least 4 usable rows spanning `min_decades` decades of eps.
[[nodiscard]] OrderFit fit_order(const SweepResult& r, SweepColumn column, double min_decades = 1.5);

/// Same fit on raw (eps, err) pairs.
[[nodiscard]] OrderFit fit_order(const std::vector<double>& eps, const std::vector<double>& err,
                                 double min_decades = 1.5);

struct FigureOptions {
    double T = 10.0;
    Vec x0{2.0};
    Vec z0{0.0, 1.5};
    double eps_a = 0.15;
    double eps_b = 0.015;
    std::size_t min_points = 2000;
    std::uint64_t seed = 42;
};

struct FigureData {
    std::vector<double> t;
    std::vector<double> x_a, x_b, x_av;
    std::vector<double> znorm_a, znorm_b;
    std::string fig1_csv, fig2_csv, fig1_svg, fig2_svg;
};

/// Slow state at two eps against the reduced average, and |z(t)| at both eps,
/// for the built-in limit-cycle example.
[[nodiscard]] FigureData reproduce_figures(const FigureOptions& opts, const IntegratorConfig& cfg);

}  // namespace spavg
