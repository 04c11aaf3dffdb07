#include "spavg/bounds.hpp"

#include "spavg/error.hpp"
#include "spavg/numfmt.hpp"
#include "spavg/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spavg {

namespace {

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

// L S e^{L S}
LogReal lse(double L, double S) { return LogReal::from_log(std::log(L) + std::log(S) + L * S); }

}  // namespace

void ConstantSet::validate() const {
    require(positive(L) && positive(P) && positive(L_av), "ConstantSet: L, P, L_av must be positive");
    require(positive(R) && positive(z_bar) && positive(T), "ConstantSet: R, z_bar, T must be positive");
    require(positive(r_y) && positive(beta_y) && positive(delta_y), "ConstantSet: r_y, beta_y, delta_y must be positive");
    require(delta_y < beta_y, "ConstantSet: delta_y must be below beta_y");
    require(positive(eps1), "ConstantSet: eps1 must be positive");
}

LogReal seps_exponent(double L, double T, double S) {
    require(positive(L) && positive(T) && positive(S), "seps_exponent: arguments must be positive");
    return LogReal::from(T * L) * (LogReal::from(1.0) + lse(L, S));
}

BoundTerms bound_terms(double eps, double S, const ConstantSet& c) {
    require(positive(eps) && positive(S), "bound_terms: eps and S_eps must be positive");
    const LogReal growth = LogReal::exp(seps_exponent(c.L, c.T, S).value());
    const LogReal one_plus = LogReal::from(1.0) + lse(c.L, S);
    const LogReal eSP = LogReal::from(eps) * LogReal::from(S) * LogReal::from(c.P);
    const LogReal TL = LogReal::from(c.T * c.L);
    BoundTerms t;
    t.delta[0] = LogReal::from(2.0) * eSP * growth;
    t.delta[1] = TL * eSP * one_plus * growth;
    t.delta[2] = TL * LogReal::from(eps) * one_plus * growth;
    const double lg = -0.25 * std::log(eps) - std::log(S);
    for (std::size_t i = 0; i < 3; ++i) t.d_log_delta[i] = LogReal::from(lg) * t.delta[i];
    t.d_tail = (eSP + LogReal::from(eps)) * lse(c.L, S);
    return t;
}

LogReal delta_bar(double eps, double S, const ConstantSet& c) {
    const BoundTerms t = bound_terms(eps, S, c);
    return t.delta[0] + t.delta[1] + t.delta[2];
}

LogReal d_bar(double eps, double S, const LogReal& dbar, const ConstantSet& c) {
    require(positive(eps) && positive(S), "d_bar: eps and S_eps must be positive");
    const LogReal inner = dbar + LogReal::from(eps * S * c.P) + LogReal::from(eps);
    return lse(c.L, S) * inner;
}

LogReal k_eps(double eps, double S, const LogReal& dbar, double gamma, const ConstantSet& c) {
    require(positive(eps) && positive(S), "k_eps: eps and S_eps must be positive");
    require(gamma >= 0.0, "k_eps: gamma(S_eps) must be non-negative");
    const double a = eps * S * c.L_av;
    const LogReal tg = LogReal::from(c.T * gamma * std::max(c.R, c.z_bar));
    const LogReal tail = LogReal::from(a) * (LogReal::from(eps * S * c.P) + tg) * LogReal::exp(a);
    return dbar + tg + tail;
}

LogReal f_eps(double eps, double S, const LogReal& Dbar, const ConstantSet& c) {
    require(positive(eps) && positive(S), "f_eps: eps and S_eps must be positive");
    require(c.delta_y < c.beta_y, "f_eps: delta_y must be below beta_y");
    const double q = std::exp(-(c.beta_y - c.delta_y) * S);
    if (q >= 1.0 - 1e-12) fail(ErrorKind::Numeric, "grid too coarse for F(eps)");
    const double denom = -std::expm1(-(c.beta_y - c.delta_y) * S);
    const LogReal frac = LogReal::from(c.r_y) * LogReal::exp(-c.beta_y * S) / LogReal::from(denom);
    return Dbar * (LogReal::from(1.0) + frac);
}

double eps_bar(const ConstantSet& c) {
    c.validate();
    if (c.r_y <= 1.0) return c.eps1;
    // S_eps decreases in eps, so the condition S_eps >= ln(r_y)/delta_y holds
    // exactly for eps up to the eps whose root is that S.
    const double S_min = std::log(c.r_y) / c.delta_y;
    return std::min(c.eps1, eps_for_seps(c.L, c.T, S_min));
}

EpsDoubleStar eps_double_star(double t_a, const ConstantSet& c) {
    c.validate();
    require(t_a > 0.0 && t_a < c.T, "eps_double_star: t_a must lie in (0, T)");
    const double target = (c.beta_y - c.delta_y) * t_a;
    const auto h = [](double e) { return -0.5 * e * std::log(e); };
    const double e_max = std::exp(-1.0);
    if (target > h(e_max)) return {e_max, true};
    double lo = 0.0;
    double hi = e_max;
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (h(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return {std::abs(h(lo) - target) < std::abs(h(hi) - target) ? lo : hi, false};
}

std::vector<GammaConditionRow> check_gamma_condition(const std::function<double(double)>& gamma,
                                                     const ConstantSet& c, double r_prime, double alpha1,
                                                     const std::vector<double>& eps_grid) {
    c.validate();
    require(alpha1 > 2.0, "check_gamma_condition: alpha1 must exceed 2");
    require(positive(r_prime), "check_gamma_condition: r' must be positive");
    std::vector<GammaConditionRow> rows;
    rows.reserve(eps_grid.size());
    for (double eps : eps_grid) {
        GammaConditionRow row;
        row.eps = eps;
        row.S_eps = solve_seps(c.L, c.T, eps);
        const double g = gamma(row.S_eps);
        require(g >= 0.0, "check_gamma_condition: gamma must be non-negative");
        const double expo = seps_exponent(c.L, c.T, row.S_eps).value();
        row.log_gap = std::log(g) - (std::log(r_prime) - alpha1 * expo);
        row.holds = row.log_gap <= 0.0;
        rows.push_back(row);
    }
    return rows;
}

std::vector<GammaConditionRow> check_gamma_condition(const GammaEnvelope& envelope, const ConstantSet& c,
                                                     double r_prime, double alpha1,
                                                     const std::vector<double>& eps_grid) {
    return check_gamma_condition([&](double s) { return envelope.at(s); }, c, r_prime, alpha1, eps_grid);
}

BoundReport bound_report(double eps, const ConstantSet& c, const std::function<double(double)>& gamma) {
    c.validate();
    BoundReport r;
    r.eps = eps;
    r.S_eps = solve_seps(c.L, c.T, eps);
    r.Delta_bar = delta_bar(eps, r.S_eps, c);
    r.D_bar = d_bar(eps, r.S_eps, r.Delta_bar, c);
    r.gamma_at_Seps = gamma ? gamma(r.S_eps) : 0.0;
    r.K = k_eps(eps, r.S_eps, r.Delta_bar, r.gamma_at_Seps, c);
    try {
        r.F = f_eps(eps, r.S_eps, r.D_bar, c);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Numeric) throw;
    }
    const LogReal root = LogReal::from(std::sqrt(eps));
    r.ratio_Delta_sqrt = (r.Delta_bar / root).value();
    r.ratio_D_sqrt = (r.D_bar / root).value();
    r.ratio_K_sqrt = (r.K / root).value();
    r.ratio_F_sqrt = r.F ? (*r.F / root).value() : std::nan("");
    return r;
}

std::string bound_report_csv(const std::vector<BoundReport>& rows) {
    std::ostringstream os;
    os << "eps,S_eps,log_Delta_bar,log_D_bar,log_K,log_F,ratio_Delta_sqrt,ratio_D_sqrt\n";
    for (const auto& r : rows) {
        os << fmt_double(r.eps) << ',' << fmt_double(r.S_eps) << ',' << format_log(r.Delta_bar) << ','
           << format_log(r.D_bar) << ',' << format_log(r.K) << ','
           << (r.F ? format_log(*r.F) : std::string("nan")) << ',' << fmt_double(r.ratio_Delta_sqrt) << ','
           << fmt_double(r.ratio_D_sqrt) << '\n';
    }
    return os.str();
}

}  // namespace spavg
