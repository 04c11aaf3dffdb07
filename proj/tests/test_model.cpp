#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spavg/error.hpp"
#include "spavg/integrate.hpp"
#include "spavg/model.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace spavg;

TEST_CASE("example right-hand side at a hand-evaluated point") {
    const auto b = builtin_example();
    const Vec x{0.0}, z{1.0, 0.0};
    const RhsValue v = eval_rhs_full(b.sys, x, z, 0.1);
    // f = -0 + 1 + 0; g = (-1 + 0 + 1, -1 - 0 + 0 + 0.1*0)
    CHECK(v.dx[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(v.dz[0] == doctest::Approx(0.0));
    CHECK(v.dz[1] == doctest::Approx(-10.0).epsilon(1e-15));
}

TEST_CASE("example rejects the origin with the offending point") {
    const auto b = builtin_example();
    const Vec x{0.0}, z{0.0, 0.0};
    try {
        (void)eval_rhs_full(b.sys, x, z, 0.1);
        FAIL("expected a domain error");
    } catch (const DomainError& e) {
        CHECK(e.kind() == ErrorKind::Domain);
        REQUIRE(e.point().size() == 2);
        CHECK(e.point()[0] == 0.0);
    }
}

TEST_CASE("zero slow field gives zero slow derivative") {
    SystemSpec s;
    s.n = 2;
    s.m = 1;
    s.f = [](std::span<const double>, std::span<const double>, double) { return Vec{0.0, 0.0}; };
    s.g = [](std::span<const double>, std::span<const double> z, double) { return Vec{-z[0]}; };
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < 20; ++i) {
        const Vec x{u(rng), u(rng)}, z{u(rng)};
        const RhsValue v = eval_rhs_full(s, x, z, 0.01 + std::abs(u(rng)));
        CHECK(v.dx[0] == 0.0);
        CHECK(v.dx[1] == 0.0);
    }
}

TEST_CASE("eval_rhs_full rejects non-positive eps") {
    const auto b = builtin_example();
    const Vec x{0.0}, z{1.0, 0.0};
    CHECK_THROWS_AS((void)eval_rhs_full(b.sys, x, z, 0.0), Error);
}

TEST_CASE("builtin example domain and attractor") {
    const auto b = builtin_example();
    CHECK(b.dom.R == 2.5);
    CHECK(b.dom.eps1 == 0.15);
    const Vec p{0.0, 0.5};
    CHECK(b.att.dist(p) == doctest::Approx(0.5));
    for (int k = 0; k < 50; ++k) {
        const double th = 2 * std::numbers::pi * k / 50.0;
        const Vec c{std::cos(th), std::sin(th)};
        CHECK(b.att.dist(c) < 1e-15);
    }
}

TEST_CASE("attractor distance is non-negative and 1-Lipschitz") {
    const auto b = builtin_example();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 500; ++i) {
        const Vec a{u(rng), u(rng)}, c{u(rng), u(rng)};
        CHECK(b.att.dist(a) >= 0.0);
        CHECK(std::abs(b.att.dist(a) - b.att.dist(c)) <= std::hypot(a[0] - c[0], a[1] - c[1]) * (1 + 1e-12));
    }
}

TEST_CASE("fast domain samples satisfy their own membership") {
    const auto b = builtin_example();
    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i) CHECK(b.dom.M.contains(b.dom.M.sample(rng)));
    const FastDomain box = FastDomain::box({-1.0, 2.0}, {1.0, 3.0});
    for (int i = 0; i < 1000; ++i) CHECK(box.contains(box.sample(rng)));
    CHECK(b.dom.M.max_norm() == 1.5);
}

TEST_CASE("closed-form boundary layer") {
    const Vec z0{1.5, 0.0};
    const Vec z1 = example_boundary_closed_form(z0, 1.0);
    CHECK(std::abs(std::hypot(z1[0], z1[1]) - 1.0) == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-14));

    const Vec on{std::cos(0.3), std::sin(0.3)};
    for (double tau : {0.0, 1.0, 7.5, 30.0}) {
        const Vec z = example_boundary_closed_form(on, tau);
        CHECK(std::hypot(z[0], z[1]) == doctest::Approx(1.0).epsilon(1e-15));
    }

    // radius 1 + 0.5 e^{-pi/2} at angle -pi/2
    const double tau = std::numbers::pi / 2;
    const Vec z = example_boundary_closed_form(z0, tau);
    const double r = 1.0 + 0.5 * std::exp(-tau);
    CHECK(z[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(z[1] == doctest::Approx(-r).epsilon(1e-15));
    CHECK(z[1] == doctest::Approx(-1.103939788175381).epsilon(1e-15));

    const Vec origin{0.0, 0.0};
    CHECK_THROWS_AS((void)example_boundary_closed_form(origin, 1.0), DomainError);
}

TEST_CASE("polar and Cartesian forms of the example agree") {
    const auto b = builtin_example();
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ur(0.5, 1.5), uth(-std::numbers::pi, std::numbers::pi), ux(-2.5, 2.5),
        ue(0.001, 0.15);
    for (int i = 0; i < 100; ++i) {
        const double r = ur(rng), th = uth(rng), xv = ux(rng), eps = ue(rng);
        const Vec x{xv}, z{r * std::cos(th), r * std::sin(th)};
        const RhsValue v = eval_rhs_full(b.sys, x, z, eps);
        // polar: x' = -x + r cos th + eps x^2, eps r' = 1 - r + eps x sin th,
        // eps th' = -1 + eps x cos th / r
        const double xdot = -xv + r * std::cos(th) + eps * xv * xv;
        const double rdot = (1.0 - r + eps * xv * std::sin(th)) / eps;
        const double thdot = (-1.0 + eps * xv * std::cos(th) / r) / eps;
        const double z1dot = rdot * std::cos(th) - r * std::sin(th) * thdot;
        const double z2dot = rdot * std::sin(th) + r * std::cos(th) * thdot;
        const double scale = std::max({1.0, std::abs(rdot), std::abs(r * thdot)});
        CHECK(std::abs(v.dx[0] - xdot) <= 1e-12 * std::max(1.0, std::abs(xdot)));
        CHECK(std::abs(v.dz[0] - z1dot) <= 1e-12 * scale);
        CHECK(std::abs(v.dz[1] - z2dot) <= 1e-12 * scale);
    }
}

TEST_CASE("boundary layer integration matches the closed form at 100 times") {
    const auto b = builtin_example();
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;
    const Vec x{0.3};
    for (const Vec& z0 : {Vec{1.5, 0.0}, Vec{0.0, 0.5}, Vec{-0.8, 0.6}}) {
        const Trajectory tr = integrate_boundary_layer(b.sys, x, z0, 10.0, cfg);
        for (int k = 0; k < 100; ++k) {
            const double tau = 10.0 * k / 99.0;
            const Vec a = tr.at(tau);
            const Vec e = example_boundary_closed_form(z0, tau);
            CHECK(std::hypot(a[0] - e[0], a[1] - e[1]) < 1e-8);
        }
    }
}

TEST_CASE("system registry") {
    CHECK_THROWS_AS((void)make_system("no-such-system"), Error);
    const auto names = system_names();
    CHECK(std::find(names.begin(), names.end(), "example") != names.end());
    register_system("zero", [] {
        SystemBundle b = builtin_linear();
        b.sys.f = [](std::span<const double>, std::span<const double>, double) { return Vec{0.0}; };
        return b;
    });
    const auto b = make_system("zero");
    CHECK(b.sys.name == "linear");
    const Vec x{0.4}, z{0.2};
    CHECK(b.sys.f(x, z, 0.1)[0] == 0.0);
}
