#include "spavg/model.hpp"

#include "spavg/error.hpp"
#include "spavg/numfmt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace spavg {

FastDomain FastDomain::annulus(Vec center, double inner, double outer) {
    require(!center.empty(), "annulus needs a center");
    require(inner >= 0.0 && outer > inner, "annulus radii must satisfy 0 <= inner < outer");
    FastDomain d;
    d.shape_ = Shape::Annulus;
    d.center_ = std::move(center);
    d.inner_ = inner;
    d.outer_ = outer;
    return d;
}

FastDomain FastDomain::box(Vec lo, Vec hi) {
    require(!lo.empty() && lo.size() == hi.size(), "box bounds must have equal, nonzero dimension");
    for (std::size_t i = 0; i < lo.size(); ++i) require(lo[i] < hi[i], "box bounds must satisfy lo < hi");
    FastDomain d;
    d.shape_ = Shape::Box;
    d.lo_ = std::move(lo);
    d.hi_ = std::move(hi);
    return d;
}

bool FastDomain::contains(std::span<const double> z, double slack) const {
    if (z.size() != dim()) return false;
    if (shape_ == Shape::Annulus) {
        const double r = dist2(z, center_);
        return r >= inner_ - slack && r <= outer_ + slack;
    }
    for (std::size_t i = 0; i < z.size(); ++i)
        if (z[i] < lo_[i] - slack || z[i] > hi_[i] + slack) return false;
    return true;
}

namespace {

Vec unit_direction(std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec v(dim);
    for (;;) {
        for (double& c : v) c = normal(rng);
        const double r = norm2(v);
        if (r > 1e-12) {
            for (double& c : v) c /= r;
            return v;
        }
    }
}

// radius with density proportional to r^(dim-1) on [a, b]
double shell_radius(std::size_t dim, double a, double b, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double k = static_cast<double>(dim);
    const double lo = std::pow(a, k);
    const double hi = std::pow(b, k);
    return std::pow(lo + unif(rng) * (hi - lo), 1.0 / k);
}

}  // namespace

Vec FastDomain::sample(std::mt19937_64& rng) const {
    if (shape_ == Shape::Annulus) {
        Vec v = unit_direction(center_.size(), rng);
        const double r = shell_radius(center_.size(), inner_, outer_, rng);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = center_[i] + r * v[i];
        return v;
    }
    Vec v(lo_.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::uniform_real_distribution<double> unif(lo_[i], hi_[i]);
        v[i] = unif(rng);
    }
    return v;
}

double FastDomain::max_norm() const {
    if (shape_ == Shape::Annulus) return norm2(center_) + outer_;
    double acc = 0.0;
    for (std::size_t i = 0; i < lo_.size(); ++i) {
        const double c = std::max(std::abs(lo_[i]), std::abs(hi_[i]));
        acc += c * c;
    }
    return std::sqrt(acc);
}

bool DomainSpec::slow_contains(std::span<const double> x, double slack) const { return norm2(x) <= R + slack; }

Vec DomainSpec::sample_slow(std::size_t n, std::mt19937_64& rng) const {
    Vec v = unit_direction(n, rng);
    const double r = shell_radius(n, 0.0, R, rng);
    for (double& c : v) c *= r;
    return v;
}

void check_fast_point(const SystemSpec& sys, std::span<const double> z) {
    if (sys.excluded && sys.excluded->contains(z))
        throw DomainError("fast state in excluded region at z = (" + join_csv(z) + ")", Vec(z.begin(), z.end()));
}

RhsValue eval_rhs_full(const SystemSpec& sys, std::span<const double> x, std::span<const double> z, double eps) {
    require(eps > 0.0, "eval_rhs_full: eps must be positive");
    require(x.size() == sys.n && z.size() == sys.m, "eval_rhs_full: dimension mismatch");
    check_fast_point(sys, z);
    RhsValue out{sys.f(x, z, eps), sys.g(x, z, eps)};
    for (double& c : out.dz) c /= eps;
    return out;
}

SystemBundle builtin_example() {
    SystemBundle b;
    SystemSpec& s = b.sys;
    s.name = "example";
    s.n = 1;
    s.m = 2;
    s.f = [](std::span<const double> x, std::span<const double> z, double eps) {
        return Vec{-x[0] + z[0] + eps * x[0] * x[0]};
    };
    s.g = [](std::span<const double> x, std::span<const double> z, double eps) {
        const double r = std::hypot(z[0], z[1]);
        return Vec{-z[0] + z[1] + z[0] / r, -z[0] - z[1] + z[1] / r + eps * x[0]};
    };
    s.excluded = ExcludedRegion{[](std::span<const double> z) { return std::hypot(z[0], z[1]); }, 1e-9};
    s.f_av = [](std::span<const double> x) { return Vec{-x[0]}; };
    // gamma(s) = 2 max{|z0|, 1} / s, with the max taken over M (outer radius 1.5)
    s.gamma = [](double sv) { return 2.0 * 1.5 / sv; };

    b.dom.R = 2.5;
    b.dom.eps1 = 0.15;
    b.dom.M = FastDomain::annulus({0.0, 0.0}, 0.5, 1.5);
    b.att.dist = [](std::span<const double> z) { return std::abs(std::hypot(z[0], z[1]) - 1.0); };
    b.att.description = "unit circle |z| = 1";
    return b;
}

Vec example_boundary_closed_form(std::span<const double> z0, double tau) {
    require(z0.size() == 2, "example_boundary_closed_form: z0 must be 2-dimensional");
    require(tau >= 0.0, "example_boundary_closed_form: tau must be nonnegative");
    const double r0 = std::hypot(z0[0], z0[1]);
    if (r0 == 0.0) throw DomainError("boundary layer undefined at the origin", Vec(z0.begin(), z0.end()));
    const double th0 = std::atan2(z0[1], z0[0]);
    const double r = (r0 - 1.0) * std::exp(-tau) + 1.0;
    return {r * std::cos(th0 - tau), r * std::sin(th0 - tau)};
}

SystemBundle builtin_linear() {
    SystemBundle b;
    SystemSpec& s = b.sys;
    s.name = "linear";
    s.n = 1;
    s.m = 1;
    s.f = [](std::span<const double> x, std::span<const double>, double) { return Vec{-x[0]}; };
    s.g = [](std::span<const double>, std::span<const double> z, double) { return Vec{-z[0]}; };
    s.f_av = [](std::span<const double> x) { return Vec{-x[0]}; };
    s.gamma = [](double) { return 0.0; };
    b.dom.R = 1.0;
    b.dom.eps1 = 0.5;
    b.dom.M = FastDomain::box({-1.0}, {1.0});
    b.att.dist = [](std::span<const double> z) { return std::abs(z[0]); };
    b.att.description = "origin";
    return b;
}

namespace {

struct Registry {
    std::mutex mu;
    std::map<std::string, SystemFactory> factories{{"example", builtin_example}, {"linear", builtin_linear}};
};

Registry& registry() {
    static Registry r;
    return r;
}

}  // namespace

void register_system(const std::string& name, SystemFactory factory) {
    require(!name.empty(), "system name must be nonempty");
    require(static_cast<bool>(factory), "system factory must be callable");
    auto& r = registry();
    std::lock_guard lock(r.mu);
    r.factories[name] = std::move(factory);
}

SystemBundle make_system(const std::string& name) {
    SystemFactory factory;
    {
        auto& r = registry();
        std::lock_guard lock(r.mu);
        auto it = r.factories.find(name);
        if (it == r.factories.end()) fail(ErrorKind::Config, "unknown system '" + name + "'");
        factory = it->second;
    }
    SystemBundle b = factory();
    if (b.sys.name.empty()) b.sys.name = name;
    return b;
}

std::vector<std::string> system_names() {
    auto& r = registry();
    std::lock_guard lock(r.mu);
    std::vector<std::string> out;
    for (const auto& [k, v] : r.factories) out.push_back(k);
    return out;
}

}  // namespace spavg
