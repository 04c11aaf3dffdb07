#pragma once

#include "spavg/integrate.hpp"
#include "spavg/model.hpp"

#include <string>
#include <vector>

namespace spavg {

/// Weighting of the finite-horizon average (1/T) int_0^T f(x, phi_b(s), 0) ds.
///  - Uniform: the plain finite-horizon average; converges like 1/T.
///  - Bump: smooth weight exp(-1/(u(1-u))), u = s/T, normalised to unit mass.
///    Same limit as Uniform, but converges faster than any power of 1/T on
///    quasi-periodic boundary layers.
enum class AverageWindow { Uniform, Bump };

[[nodiscard]] const char* window_name(AverageWindow w) noexcept;

struct AverageResult {
    Vec x;
    Vec f_av;
    double T_av = 0.0;
    double cauchy_gap = 0.0;  // |avg(T_av) - avg(T_av/2)|
    double z0_spread = 0.0;   // max pairwise distance across z0 samples (0 for one sample)
};

/// Quadrature nodes are uniform in fast time with spacing at most `max_dtau`.
struct AverageOptions {
    AverageWindow window = AverageWindow::Uniform;
    double max_dtau = 0.01;
};

[[nodiscard]] AverageResult compute_fav(const SystemSpec& sys, const Vec& x, const Vec& z0, double T_av,
                                        const IntegratorConfig& cfg, const AverageOptions& opts = {});

struct WellDefinedDiagnostic {
    Vec x;
    std::vector<Vec> averages;  // one per z0 sample
    double z0_spread = 0.0;
    bool pass = false;
};

/// Per slow point: spread of the averages over all fast initial conditions.
/// Defaults to the Bump window.
[[nodiscard]] std::vector<WellDefinedDiagnostic> check_average_well_defined(
    const SystemSpec& sys, const std::vector<Vec>& x_samples, const std::vector<Vec>& z0_samples, double T_av,
    double tol, const IntegratorConfig& cfg, AverageOptions opts = {AverageWindow::Bump, 0.01});

/// Envelope of (1/s)|int_{tau'}^{tau'+s} (f(x,phi_b,0) - f_av(x)) dtau| over samples.
struct GammaEnvelope {
    std::vector<double> s_grid;
    std::vector<double> gamma_hat;
    double s_star = 0.0;

    /// Log-log interpolation on the grid (linear where a value is zero).
    /// Throws Error(Argument) "extend s_grid" outside [s_grid.front(), s_grid.back()].
    [[nodiscard]] double at(double s) const;
};

[[nodiscard]] GammaEnvelope estimate_gamma(const SystemSpec& sys, const SlowField& f_av,
                                           const std::vector<Vec>& x_samples, const std::vector<Vec>& z0_samples,
                                           const std::vector<double>& s_grid,
                                           const std::vector<double>& tau_prime_samples,
                                           const IntegratorConfig& cfg, double max_dtau = 0.01);

/// `s,gamma_hat`
[[nodiscard]] std::string gamma_csv(const GammaEnvelope& env);

/// Numerical average field, memoised per x bit pattern. Defaults to the Bump window.
[[nodiscard]] SlowField build_fav_field(const SystemSpec& sys, const Vec& z0_ref, double T_av,
                                        const IntegratorConfig& cfg,
                                        AverageOptions opts = {AverageWindow::Bump, 0.01});

}  // namespace spavg
