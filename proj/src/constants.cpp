#include "spavg/constants.hpp"

#include "spavg/error.hpp"
#include "spavg/numfmt.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace spavg {

namespace {

constexpr double kClusterRadius = 1e-3;

JointPoint draw_point(const SystemSpec& sys, const DomainSpec& dom, double eps_max, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, eps_max);
    for (;;) {
        JointPoint p{dom.sample_slow(sys.n, rng), dom.M.sample(rng), unif(rng)};
        if (!(sys.excluded && sys.excluded->contains(p.z))) return p;
    }
}

// Uniform offset of norm at most `radius` in R^dim.
Vec small_offset(std::size_t dim, double radius, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vec v(dim);
    double r = 0.0;
    while (r < 1e-12) {
        for (double& c : v) c = normal(rng);
        r = norm2(v);
    }
    const double scale = radius * unif(rng) / r;
    for (double& c : v) c *= scale;
    return v;
}

bool inside(const SystemSpec& sys, const DomainSpec& dom, const JointPoint& p, double eps_max) {
    return dom.slow_contains(p.x) && dom.M.contains(p.z) && p.eps >= 0.0 && p.eps <= eps_max &&
           !(sys.excluded && sys.excluded->contains(p.z));
}

double joint_distance(const JointPoint& a, const JointPoint& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.x.size(); ++i) s += (a.x[i] - b.x[i]) * (a.x[i] - b.x[i]);
    for (std::size_t i = 0; i < a.z.size(); ++i) s += (a.z[i] - b.z[i]) * (a.z[i] - b.z[i]);
    s += (a.eps - b.eps) * (a.eps - b.eps);
    return std::sqrt(s);
}

bool finite_all(const Vec& v) {
    return std::all_of(v.begin(), v.end(), [](double c) { return std::isfinite(c); });
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::vector<JointPair> sample_joint_pairs(const SystemSpec& sys, const DomainSpec& dom, std::size_t n_pairs,
                                          double eps_max, std::mt19937_64& rng) {
    require(eps_max >= 0.0, "sample_joint_pairs: eps_max must be non-negative");
    std::vector<JointPair> pairs;
    pairs.reserve(n_pairs);
    const std::size_t n_uniform = n_pairs / 2;
    while (pairs.size() < n_uniform) {
        JointPoint p = draw_point(sys, dom, eps_max, rng);
        JointPoint q = draw_point(sys, dom, eps_max, rng);
        if (joint_distance(p, q) > 0.0) pairs.emplace_back(std::move(p), std::move(q));
    }
    const std::size_t dim = sys.n + sys.m + 1;
    while (pairs.size() < n_pairs) {
        JointPoint p = draw_point(sys, dom, eps_max, rng);
        for (int attempt = 0; attempt < 32; ++attempt) {
            const Vec off = small_offset(dim, kClusterRadius, rng);
            JointPoint q = p;
            for (std::size_t i = 0; i < sys.n; ++i) q.x[i] += off[i];
            for (std::size_t i = 0; i < sys.m; ++i) q.z[i] += off[sys.n + i];
            q.eps += off[dim - 1];
            if (inside(sys, dom, q, eps_max) && joint_distance(p, q) > 0.0) {
                pairs.emplace_back(std::move(p), std::move(q));
                break;
            }
        }
    }
    return pairs;
}

double max_difference_quotient(const SystemSpec& sys, const std::vector<JointPair>& pairs) {
    double best = 0.0;
    for (const auto& [p, q] : pairs) {
        const double d = joint_distance(p, q);
        if (d == 0.0) continue;
        const Vec fp = sys.f(p.x, p.z, p.eps);
        const Vec fq = sys.f(q.x, q.z, q.eps);
        const Vec gp = sys.g(p.x, p.z, p.eps);
        const Vec gq = sys.g(q.x, q.z, q.eps);
        if (!finite_all(fp) || !finite_all(fq) || !finite_all(gp) || !finite_all(gq))
            fail(ErrorKind::Numeric, "estimate_lipschitz: non-finite field value");
        best = std::max({best, dist2(fp, fq) / d, dist2(gp, gq) / d});
    }
    return best;
}

Estimate estimate_lipschitz(const SystemSpec& sys, const DomainSpec& dom, std::size_t n_pairs, double eps_max,
                            std::uint64_t seed) {
    require(n_pairs >= 100, "estimate_lipschitz: need at least 100 pairs");
    std::mt19937_64 rng(seed);
    const double raw = max_difference_quotient(sys, sample_joint_pairs(sys, dom, n_pairs, eps_max, rng));
    return {raw, 1.2, raw * 1.2, seed};
}

Estimate estimate_bound_P(const SystemSpec& sys, const DomainSpec& dom, std::size_t n_samples, double eps_max,
                          std::uint64_t seed) {
    require(n_samples >= 1000, "estimate_bound_P: need at least 1000 samples");
    std::mt19937_64 rng(seed);
    double raw = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const JointPoint p = draw_point(sys, dom, eps_max, rng);
        const Vec f = sys.f(p.x, p.z, p.eps);
        const Vec g = sys.g(p.x, p.z, p.eps);
        if (!finite_all(f) || !finite_all(g)) fail(ErrorKind::Numeric, "estimate_bound_P: non-finite field value");
        raw = std::max({raw, norm2(f), norm2(g)});
    }
    return {raw, 1.1, raw * 1.1, seed};
}

Estimate estimate_lav(const SlowField& f_av, std::size_t n, double R, std::size_t n_pairs, std::uint64_t seed) {
    require(static_cast<bool>(f_av), "estimate_lav: no average field");
    require(n_pairs >= 100, "estimate_lav: need at least 100 pairs");
    require(R > 0.0, "estimate_lav: R must be positive");
    DomainSpec ball;
    ball.R = R;
    std::mt19937_64 rng(seed);
    double raw = 0.0;
    const auto quotient = [&](const Vec& p, const Vec& q) {
        const double d = dist2(p, q);
        if (d > 0.0) raw = std::max(raw, dist2(f_av(p), f_av(q)) / d);
    };
    for (std::size_t i = 0; i < n_pairs / 2; ++i) quotient(ball.sample_slow(n, rng), ball.sample_slow(n, rng));
    for (std::size_t i = n_pairs / 2; i < n_pairs;) {
        const Vec p = ball.sample_slow(n, rng);
        const Vec off = small_offset(n, kClusterRadius, rng);
        Vec q = p;
        for (std::size_t k = 0; k < n; ++k) q[k] += off[k];
        if (!ball.slow_contains(q)) continue;
        quotient(p, q);
        ++i;
    }
    return {raw, 1.2, raw * 1.2, seed};
}

DecayFit fit_exponential_decay(const std::vector<Trajectory>& runs, const AttractorSpec& att) {
    require(runs.size() >= 3, "fit_exponential_decay: need at least 3 runs");
    require(static_cast<bool>(att.dist), "fit_exponential_decay: attractor has no distance function");
    DecayFit fit;
    fit.beta_y = std::numeric_limits<double>::infinity();
    double intercept_max = -std::numeric_limits<double>::infinity();
    double sq_sum = 0.0;
    std::size_t sq_count = 0;
    std::vector<std::vector<std::pair<double, double>>> windows;
    for (const auto& run : runs) {
        require(run.size() >= 2, "fit_exponential_decay: run too short");
        const double d0 = att.dist(run.states.front());
        require(d0 > 0.0, "fit_exponential_decay: run starts on the attractor");
        std::vector<std::pair<double, double>> pts;
        // the first sample is the normaliser (log ratio 0) and carries no rate information
        for (std::size_t i = 1; i < run.size(); ++i) {
            const double d = att.dist(run.states[i]);
            if (d >= 1e-8) pts.emplace_back(run.times[i] - run.times.front(), std::log(d / d0));
        }
        require(pts.size() >= 2, "fit_exponential_decay: fewer than two samples above 1e-8 after the start");
        double mt = 0.0, my = 0.0;
        for (const auto& [t, y] : pts) {
            mt += t;
            my += y;
        }
        mt /= static_cast<double>(pts.size());
        my /= static_cast<double>(pts.size());
        double stt = 0.0, sty = 0.0;
        for (const auto& [t, y] : pts) {
            stt += (t - mt) * (t - mt);
            sty += (t - mt) * (y - my);
        }
        require(stt > 0.0, "fit_exponential_decay: degenerate time samples");
        const double slope = sty / stt;
        const double a = my - slope * mt;
        const double b = -slope;
        if (!(b > 0.0))
            fail(ErrorKind::Assumption, "boundary layer does not converge exponentially to the attractor");
        for (const auto& [t, y] : pts) {
            const double e = y - (a - b * t);
            sq_sum += e * e;
            ++sq_count;
        }
        fit.runs.emplace_back(a, b);
        fit.beta_y = std::min(fit.beta_y, b);
        intercept_max = std::max(intercept_max, a);
        windows.push_back(std::move(pts));
    }
    double log_r = std::max(0.0, intercept_max);
    for (const auto& pts : windows)
        for (const auto& [t, y] : pts) log_r = std::max(log_r, y + fit.beta_y * t);
    fit.r_y = std::exp(log_r);
    fit.rms_residual = std::sqrt(sq_sum / static_cast<double>(sq_count));
    return fit;
}

ConstantSet estimate_constants(const SystemBundle& b, const EstimateOptions& opts, const SlowField& f_av) {
    ConstantSet c;
    c.seed = opts.seed;
    const Estimate L = estimate_lipschitz(b.sys, b.dom, opts.n_pairs, b.dom.eps1, opts.seed);
    const Estimate P = estimate_bound_P(b.sys, b.dom, opts.n_samples, b.dom.eps1, opts.seed + 1);
    const SlowField& field = b.sys.f_av ? b.sys.f_av : f_av;
    const Estimate Lav = estimate_lav(field, b.sys.n, b.dom.R, opts.n_pairs, opts.seed + 2);
    c.L = L.value;
    c.L_safety = L.safety;
    c.P = P.value;
    c.P_safety = P.safety;
    // a constant average field has slope 0; keep the set strictly positive
    c.L_av = std::max(Lav.value, 1e-12);
    c.L_av_safety = Lav.safety;
    c.R = b.dom.R;
    c.z_bar = b.dom.M.max_norm();
    c.T = opts.T;
    c.eps1 = b.dom.eps1;

    std::mt19937_64 rng(opts.seed + 3);
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;
    std::vector<Trajectory> runs;
    for (std::size_t i = 0; i < opts.n_decay_runs; ++i) {
        const Vec x = b.dom.sample_slow(b.sys.n, rng);
        Vec z = b.dom.M.sample(rng);
        while (b.att.dist(z) < 1e-3 || (b.sys.excluded && b.sys.excluded->contains(z))) z = b.dom.M.sample(rng);
        runs.push_back(integrate_boundary_layer(b.sys, x, z, opts.decay_tau, cfg));
    }
    const DecayFit fit = fit_exponential_decay(runs, b.att);
    c.r_y = fit.r_y;
    c.beta_y = fit.beta_y;
    c.delta_y = 0.5 * fit.beta_y;
    c.validate();
    return c;
}

std::string constants_to_text(const ConstantSet& c) {
    std::ostringstream os;
    os << "# seed = " << c.seed << '\n';
    const auto kv = [&](const char* k, double v) { os << k << " = " << fmt_double(v) << '\n'; };
    kv("L", c.L);
    kv("P", c.P);
    kv("L_av", c.L_av);
    kv("R", c.R);
    kv("z_bar", c.z_bar);
    kv("T", c.T);
    kv("r_y", c.r_y);
    kv("beta_y", c.beta_y);
    kv("delta_y", c.delta_y);
    kv("eps1", c.eps1);
    kv("L_safety", c.L_safety);
    kv("P_safety", c.P_safety);
    kv("L_av_safety", c.L_av_safety);
    os << "seed = " << c.seed << '\n';
    return os.str();
}

ConstantSet constants_from_text(std::string_view text) {
    ConstantSet c;
    const std::map<std::string, double*> fields{
        {"L", &c.L},         {"P", &c.P},           {"L_av", &c.L_av},         {"R", &c.R},
        {"z_bar", &c.z_bar}, {"T", &c.T},           {"r_y", &c.r_y},           {"beta_y", &c.beta_y},
        {"delta_y", &c.delta_y}, {"eps1", &c.eps1}, {"L_safety", &c.L_safety}, {"P_safety", &c.P_safety},
        {"L_av_safety", &c.L_av_safety},
    };
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            fail(ErrorKind::Config, "constants line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string val = trim(std::string_view(body).substr(eq + 1));
        if (key == "seed") {
            std::uint64_t s = 0;
            const auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), s);
            if (ec != std::errc{} || p != val.data() + val.size())
                fail(ErrorKind::Config, "constants line " + std::to_string(line_no) + ": bad seed");
            c.seed = s;
            continue;
        }
        const auto it = fields.find(key);
        if (it == fields.end()) fail(ErrorKind::Config, "constants: unknown key '" + key + "'");
        *it->second = parse_double(val);
    }
    return c;
}

}  // namespace spavg
