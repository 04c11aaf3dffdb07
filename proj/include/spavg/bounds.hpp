#pragma once

#include "spavg/averaging.hpp"
#include "spavg/logreal.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace spavg {

/// Analysis constants. Sampled estimates carry the safety factor they were
/// inflated by and the seed that produced them.
struct ConstantSet {
    double L = 1.0;      // Lipschitz constant of f and g
    double P = 1.0;      // bound on |f| and |g|
    double L_av = 1.0;   // Lipschitz constant of f_av
    double R = 1.0;      // slow radius
    double z_bar = 1.0;  // max_{z in M} |z|
    double T = 1.0;      // horizon
    double r_y = 1.0;    // boundary-layer decay |phi_b|_eta <= r_y e^{-beta_y tau} |z0|_eta
    double beta_y = 1.0;
    double delta_y = 0.5;  // in (0, beta_y)
    double eps1 = 0.1;

    double L_safety = 1.0;
    double P_safety = 1.0;
    double L_av_safety = 1.0;
    std::uint64_t seed = 42;

    /// Throws Error(Argument) unless all constants are positive and delta_y < beta_y.
    void validate() const;
};

/// T L (1 + S L e^{L S}) as a LogReal (the exponent itself can overflow).
[[nodiscard]] LogReal seps_exponent(double L, double T, double S);

[[nodiscard]] LogReal delta_bar(double eps, double S_eps, const ConstantSet& c);
[[nodiscard]] LogReal d_bar(double eps, double S_eps, const LogReal& delta_bar_val, const ConstantSet& c);
[[nodiscard]] LogReal k_eps(double eps, double S_eps, const LogReal& delta_bar_val, double gamma_at_Seps,
                            const ConstantSet& c);
/// Throws Error(Numeric) "grid too coarse for F(eps)" when
/// e^{-(beta_y - delta_y) S_eps} >= 1 - 1e-12.
[[nodiscard]] LogReal f_eps(double eps, double S_eps, const LogReal& d_bar_val, const ConstantSet& c);

/// The three summands of delta_bar, and the three summands of
/// ln(1/(eps^{1/4} S)) * delta_bar plus (eps S P + eps) S L e^{L S},
/// which together make up d_bar.
struct BoundTerms {
    std::array<LogReal, 3> delta;
    std::array<LogReal, 3> d_log_delta;
    LogReal d_tail;
};

[[nodiscard]] BoundTerms bound_terms(double eps, double S_eps, const ConstantSet& c);

/// Largest eps with e^{-delta_y S_eps} <= 1/r_y, capped at eps1.
[[nodiscard]] double eps_bar(const ConstantSet& c);

struct EpsDoubleStar {
    double eps = 0.0;
    bool vacuous = false;  // no root: (beta_y - delta_y) t_a exceeds max of eps ln(1/sqrt(eps))
};

/// Smaller root of (beta_y - delta_y) t_a = eps ln(1/sqrt(eps)).
[[nodiscard]] EpsDoubleStar eps_double_star(double t_a, const ConstantSet& c);

struct GammaConditionRow {
    double eps = 0.0;
    double S_eps = 0.0;
    double log_gap = 0.0;  // ln gamma(S) - (ln r' - alpha1 T L (1 + S L e^{L S})); holds iff <= 0
    bool holds = false;
};

[[nodiscard]] std::vector<GammaConditionRow> check_gamma_condition(const std::function<double(double)>& gamma,
                                                                   const ConstantSet& c, double r_prime,
                                                                   double alpha1,
                                                                   const std::vector<double>& eps_grid);
/// Envelope variant; throws "extend s_grid" when S_eps falls outside the envelope grid.
[[nodiscard]] std::vector<GammaConditionRow> check_gamma_condition(const GammaEnvelope& envelope,
                                                                   const ConstantSet& c, double r_prime,
                                                                   double alpha1,
                                                                   const std::vector<double>& eps_grid);

struct BoundReport {
    double eps = 0.0;
    double S_eps = 0.0;
    LogReal Delta_bar;
    LogReal D_bar;
    LogReal K;
    std::optional<LogReal> F;  // empty when S_eps is too small for F
    double gamma_at_Seps = 0.0;
    double ratio_Delta_sqrt = 0.0;
    double ratio_D_sqrt = 0.0;
    double ratio_K_sqrt = 0.0;
    double ratio_F_sqrt = 0.0;
};

/// All bounds at one eps; gamma supplies gamma(S_eps).
[[nodiscard]] BoundReport bound_report(double eps, const ConstantSet& c, const std::function<double(double)>& gamma);

/// `eps,S_eps,log_Delta_bar,log_D_bar,log_K,log_F,ratio_Delta_sqrt,ratio_D_sqrt`
[[nodiscard]] std::string bound_report_csv(const std::vector<BoundReport>& rows);

}  // namespace spavg
