#include "spavg/experiments.hpp"

#include "spavg/error.hpp"
#include "spavg/numfmt.hpp"
#include "spavg/svg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace spavg {

namespace {

const char* kind_status(ErrorKind k) {
    switch (k) {
        case ErrorKind::Domain: return "failed-domain";
        case ErrorKind::Assumption: return "failed-assumption";
        case ErrorKind::Config: return "failed-config";
        case ErrorKind::Numeric: return "failed-numeric";
        case ErrorKind::Argument: return "failed-argument";
    }
    return "failed";
}

std::vector<double> uniform_grid(double T, std::size_t points) {
    std::vector<double> t(points);
    for (std::size_t i = 0; i < points; ++i)
        t[i] = i + 1 == points ? T : T * static_cast<double>(i) / static_cast<double>(points - 1);
    return t;
}

std::size_t grid_points(double T, double eps, std::size_t min_points) {
    return std::max(min_points, static_cast<std::size_t>(std::ceil(4.0 * T / eps))) + 1;
}

void measure_row(SweepRow& row, const SystemBundle& b, const Vec& x0, const Vec& z0, const IntegratorConfig& cfg,
                 const SweepOptions& opts, const SlowField& field) {
    const double eps = row.eps;
    const FullSolution full = integrate_full(b.sys, x0, z0, eps, opts.T, cfg, &b.dom);
    const Trajectory bl = integrate_boundary_layer(b.sys, x0, z0, opts.T / eps, cfg);
    const Trajectory xav = integrate_reduced(field, x0, opts.T, cfg);
    const auto t = uniform_grid(opts.T, grid_points(opts.T, eps, opts.min_points));
    for (double tv : t) {
        row.sup_x_err = std::max(row.sup_x_err, dist2(full.x.at(tv), xav.at(tv)));
        if (tv >= opts.t_a) {
            const double gap = std::abs(b.att.dist(full.z.at(tv)) - b.att.dist(bl.at(std::min(tv / eps, bl.t_end()))));
            row.sup_z_gap = std::max(row.sup_z_gap, gap);
        }
    }
}

}  // namespace

SweepResult closeness_sweep(const SystemBundle& b, const Vec& x0, const Vec& z0, const std::vector<double>& eps_list,
                            const IntegratorConfig& cfg, const ConstantSet& c, const SweepOptions& opts,
                            const SlowField& f_av) {
    require(!eps_list.empty(), "closeness_sweep: empty eps list");
    require(opts.t_a > 0.0 && opts.t_a < opts.T, "closeness_sweep: t_a must lie in (0, T)");
    for (double e : eps_list)
        require(e > 0.0 && e <= b.dom.eps1, "closeness_sweep: every eps must lie in (0, eps1]");
    const SlowField& field = f_av ? f_av : b.sys.f_av;
    require(static_cast<bool>(field), "closeness_sweep: no average field");

    std::vector<double> eps_sorted = eps_list;
    std::sort(eps_sorted.begin(), eps_sorted.end(), std::greater<>());

    SweepResult out;
    out.seed = c.seed;
    for (double eps : eps_sorted) {
        SweepRow row;
        row.eps = eps;
        const auto start = std::chrono::steady_clock::now();
        try {
            measure_row(row, b, x0, z0, cfg, opts, field);
        } catch (const Error& e) {
            row.status = kind_status(e.kind());
            row.detail = e.what();
            row.sup_x_err = row.sup_z_gap = std::nan("");
        }
        row.log_K = row.log_F = std::nan("");
        if (b.sys.gamma) {
            try {
                const BoundReport br = bound_report(eps, c, b.sys.gamma);
                row.log_K = br.K.log_abs();
                if (br.F) row.log_F = br.F->log_abs();
            } catch (const Error&) {
            }
        }
        if (opts.timing)
            row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::string sweep_csv(const SweepResult& r) {
    std::ostringstream os;
    os << "# seed = " << r.seed << '\n';
    os << "eps,sup_x_err,sup_z_gap,log_K,log_F,status,wall_ms\n";
    for (const auto& row : r.rows)
        os << fmt_double(row.eps) << ',' << fmt_double(row.sup_x_err) << ',' << fmt_double(row.sup_z_gap) << ','
           << fmt_double(row.log_K) << ',' << fmt_double(row.log_F) << ',' << row.status << ','
           << fmt_double(row.wall_ms) << '\n';
    return os.str();
}

OrderFit fit_order(const std::vector<double>& eps, const std::vector<double>& err, double min_decades) {
    require(eps.size() == err.size(), "fit_order: eps and error lengths differ");
    OrderFit fit;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(err[i] > 0.0) || !(eps[i] > 0.0) || !std::isfinite(err[i])) {
            ++fit.dropped;
            continue;
        }
        lx.push_back(std::log(eps[i]));
        ly.push_back(std::log(err[i]));
    }
    fit.used = lx.size();
    require(fit.used >= 4, "fit_order: need at least 4 rows with positive error");
    const auto [mn, mx] = std::minmax_element(lx.begin(), lx.end());
    require((*mx - *mn) / std::log(10.0) >= min_decades - 1e-12,
            "fit_order: eps values span fewer than " + fmt_double(min_decades) + " decades");
    const double n = static_cast<double>(fit.used);
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
    }
    const double mx_ = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx_) * (lx[i] - mx_);
        sxy += (lx[i] - mx_) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx_;
    fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    fit.supported = fit.slope >= 0.45;
    return fit;
}

OrderFit fit_order(const SweepResult& r, SweepColumn column, double min_decades) {
    std::vector<double> eps, err;
    for (const auto& row : r.rows) {
        if (row.status != "ok") continue;
        eps.push_back(row.eps);
        err.push_back(column == SweepColumn::SupXErr ? row.sup_x_err : row.sup_z_gap);
    }
    return fit_order(eps, err, min_decades);
}

FigureData reproduce_figures(const FigureOptions& opts, const IntegratorConfig& cfg) {
    require(opts.T > 0.0, "reproduce_figures: T must be positive");
    const SystemBundle b = builtin_example();
    const FullSolution a = integrate_full(b.sys, opts.x0, opts.z0, opts.eps_a, opts.T, cfg, &b.dom);
    const FullSolution c = integrate_full(b.sys, opts.x0, opts.z0, opts.eps_b, opts.T, cfg, &b.dom);
    const Trajectory av = integrate_reduced(b.sys.f_av, opts.x0, opts.T, cfg);

    FigureData d;
    d.t = uniform_grid(opts.T, grid_points(opts.T, std::min(opts.eps_a, opts.eps_b), opts.min_points));
    for (double tv : d.t) {
        d.x_a.push_back(a.x.at(tv)[0]);
        d.x_b.push_back(c.x.at(tv)[0]);
        d.x_av.push_back(av.at(tv)[0]);
        d.znorm_a.push_back(norm2(a.z.at(tv)));
        d.znorm_b.push_back(norm2(c.z.at(tv)));
    }

    const std::string head = "# seed = " + std::to_string(opts.seed) + "; eps_a = " + fmt_double(opts.eps_a) +
                             "; eps_b = " + fmt_double(opts.eps_b) + '\n';
    std::ostringstream f1, f2;
    f1 << head << "t,x_eps_a,x_eps_b,x_av\n";
    f2 << head << "t,znorm_eps_a,znorm_eps_b\n";
    for (std::size_t i = 0; i < d.t.size(); ++i) {
        f1 << fmt_double(d.t[i]) << ',' << fmt_double(d.x_a[i]) << ',' << fmt_double(d.x_b[i]) << ','
           << fmt_double(d.x_av[i]) << '\n';
        f2 << fmt_double(d.t[i]) << ',' << fmt_double(d.znorm_a[i]) << ',' << fmt_double(d.znorm_b[i]) << '\n';
    }
    d.fig1_csv = f1.str();
    d.fig2_csv = f2.str();

    const std::string la = "eps = " + fmt_double(opts.eps_a);
    const std::string lb = "eps = " + fmt_double(opts.eps_b);
    d.fig1_svg = svg_line_plot("slow state x(t)", "t", "x", d.t,
                               {{"x, " + la, d.x_a, "#1f77b4"}, {"x, " + lb, d.x_b, "#d62728"},
                                {"x_av", d.x_av, "#000000"}});
    d.fig2_svg = svg_line_plot("fast state norm |z(t)|", "t", "|z|", d.t,
                               {{"|z|, " + la, d.znorm_a, "#1f77b4"}, {"|z|, " + lb, d.znorm_b, "#d62728"}});
    return d;
}

}  // namespace spavg
