#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spavg/averaging.hpp"
#include "spavg/error.hpp"
#include "spavg/model.hpp"

#include <cmath>

using namespace spavg;

namespace {

// dz/dtau = z - z^3 with f = z: two stable rest points at +-1.
SystemSpec bistable() {
    SystemSpec s;
    s.name = "bistable";
    s.n = 1;
    s.m = 1;
    s.f = [](std::span<const double>, std::span<const double> z, double) { return Vec{z[0]}; };
    s.g = [](std::span<const double>, std::span<const double> z, double) { return Vec{z[0] - z[0] * z[0] * z[0]}; };
    return s;
}

SlowField minus_x() {
    return [](std::span<const double> x) { return Vec{-x[0]}; };
}

std::vector<Vec> circle_samples() {
    std::vector<Vec> out;
    for (double r : {0.5, 1.5})
        for (int k = 0; k < 4; ++k) {
            const double th = 0.25 * M_PI + 0.5 * M_PI * k;
            out.push_back({r * std::cos(th), r * std::sin(th)});
        }
    return out;
}

}  // namespace

TEST_CASE("example average is -x within the envelope tolerance") {
    const auto b = builtin_example();
    const AverageResult r = compute_fav(b.sys, {0.7}, {1.2, 0.0}, 200.0, IntegratorConfig{});
    CHECK(std::abs(r.f_av[0] + 0.7) <= 2.0 * 1.2 / 200.0 + 1e-6);
    CHECK(r.cauchy_gap >= 0.0);
    CHECK(r.T_av == 200.0);
}

TEST_CASE("average of a field that ignores z is exact") {
    const auto b = builtin_linear();
    for (double x : {-0.9, 0.0, 0.35}) {
        const AverageResult r = compute_fav(b.sys, {x}, {0.5}, 50.0, IntegratorConfig{});
        CHECK(std::abs(r.f_av[0] + x) <= 1e-14);
    }
}

TEST_CASE("example average at x = 0 against the closed-form integral") {
    const auto b = builtin_example();
    const double T = 100.0;
    // (1/T) int_0^T (0.5 e^{-s} + 1) cos(s) ds
    const double exact = (0.5 * 0.5 * (std::exp(-T) * (std::sin(T) - std::cos(T)) + 1.0) + std::sin(T)) / T;
    const AverageResult r = compute_fav(b.sys, {0.0}, {1.5, 0.0}, T, IntegratorConfig{});
    CHECK(std::abs(r.f_av[0] - exact) < 1e-6);
}

TEST_CASE("well-definedness passes on the example and the spread shrinks") {
    const auto b = builtin_example();
    const auto zs = circle_samples();
    double prev = 1e300;
    for (double T : {100.0, 200.0, 500.0}) {
        const auto d = check_average_well_defined(b.sys, {{0.4}}, zs, T, 0.05, IntegratorConfig{});
        REQUIRE(d.size() == 1);
        CHECK(d[0].pass);
        CHECK(d[0].z0_spread < prev);
        prev = d[0].z0_spread;
    }
    CHECK(prev <= 1e-3);
}

TEST_CASE("well-definedness is exact when f ignores z") {
    const auto b = builtin_linear();
    const auto d = check_average_well_defined(b.sys, {{0.3}, {-0.6}}, {{-0.9}, {0.1}, {0.8}}, 40.0, 0.0,
                                              IntegratorConfig{});
    for (const auto& r : d) {
        CHECK(r.z0_spread == 0.0);
        CHECK(r.pass);
    }
}

TEST_CASE("bistable boundary layer fails well-definedness") {
    const SystemSpec s = bistable();
    const auto d = check_average_well_defined(s, {{0.0}}, {{-0.5}, {0.5}}, 200.0, 0.05, IntegratorConfig{});
    REQUIRE(d.size() == 1);
    CHECK_FALSE(d[0].pass);
    CHECK(d[0].z0_spread == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("gamma envelope stays under 2 max{r0,1}/s") {
    const auto b = builtin_example();
    const auto zs = circle_samples();
    const std::vector<double> s_grid{5, 10, 20, 50, 100};
    const GammaEnvelope env =
        estimate_gamma(b.sys, minus_x(), {{-2.0}, {0.0}, {1.3}}, zs, s_grid, {0.0, 3.1, 17.0}, IntegratorConfig{});
    double worst_scaled = 0.0;
    for (std::size_t j = 0; j < s_grid.size(); ++j) {
        CHECK(env.gamma_hat[j] >= 0.0);
        CHECK(env.gamma_hat[j] <= 2.0 * 1.5 / s_grid[j]);
        worst_scaled = std::max(worst_scaled, env.gamma_hat[j] * s_grid[j]);
    }
    CHECK(worst_scaled <= 3.0);
}

TEST_CASE("gamma envelope is zero when f ignores z") {
    const auto b = builtin_linear();
    const GammaEnvelope env = estimate_gamma(b.sys, b.sys.f_av, {{0.5}}, {{0.2}, {-0.7}}, {1, 4, 9}, {0.0, 2.0},
                                             IntegratorConfig{});
    for (double g : env.gamma_hat) CHECK(g == 0.0);
}

TEST_CASE("gamma at s = 10 from the unit circle is |sin 10|/10") {
    const auto b = builtin_example();
    const GammaEnvelope env = estimate_gamma(b.sys, minus_x(), {{0.0}}, {{1.0, 0.0}}, {10.0}, {0.0}, IntegratorConfig{});
    CHECK(std::abs(env.gamma_hat[0] - std::abs(std::sin(10.0)) / 10.0) < 1e-6);
}

TEST_CASE("envelope over a superset dominates any single sample") {
    const auto b = builtin_example();
    const std::vector<double> s_grid{5, 20};
    const GammaEnvelope all =
        estimate_gamma(b.sys, minus_x(), {{0.0}, {1.0}}, circle_samples(), s_grid, {0.0, 4.0}, IntegratorConfig{});
    for (const Vec& z : circle_samples()) {
        const GammaEnvelope one = estimate_gamma(b.sys, minus_x(), {{1.0}}, {z}, s_grid, {4.0}, IntegratorConfig{});
        for (std::size_t j = 0; j < s_grid.size(); ++j) CHECK(one.gamma_hat[j] <= all.gamma_hat[j]);
    }
}

TEST_CASE("envelope interpolation and range") {
    GammaEnvelope env;
    env.s_grid = {1.0, 10.0, 100.0};
    env.gamma_hat = {2.0, 0.2, 0.02};
    CHECK(env.at(10.0) == doctest::Approx(0.2));
    CHECK(env.at(std::sqrt(10.0)) == doctest::Approx(2.0 / std::sqrt(10.0)));
    CHECK_THROWS_WITH_AS((void)env.at(200.0), doctest::Contains("extend s_grid"), Error);
    CHECK_THROWS_AS((void)env.at(0.5), Error);
    CHECK(gamma_csv(env).rfind("s,gamma_hat\n", 0) == 0);
}

TEST_CASE("Cauchy gap does not grow when the horizon doubles") {
    const auto b = builtin_example();
    AverageOptions opts{AverageWindow::Bump, 0.01};
    double prev = 1e300;
    for (double T : {100.0, 200.0, 400.0}) {
        const AverageResult r = compute_fav(b.sys, {0.5}, {1.5, 0.0}, T, IntegratorConfig{}, opts);
        CHECK(r.cauchy_gap <= 1.1 * prev);
        prev = r.cauchy_gap;
    }
}

TEST_CASE("numeric average field is memoised and tracks the closed form") {
    const auto b = builtin_example();
    const SlowField field = build_fav_field(b.sys, {1.5, 0.0}, 100.0, IntegratorConfig{});
    const Vec x{0.7};
    const Vec a = field(x);
    const Vec c = field(x);
    CHECK(a[0] == c[0]);
    CHECK(std::abs(a[0] + 0.7) < 1e-4);

    IntegratorConfig slow;
    slow.max_step = 0.5;
    slow.rel_tol = 1e-8;
    slow.abs_tol = 1e-10;
    const Trajectory num = integrate_reduced(field, {2.0}, 10.0, slow);
    const Trajectory ref = integrate_reduced(b.sys.f_av, {2.0}, 10.0, slow);
    double sup = 0.0;
    for (int k = 0; k <= 1000; ++k) {
        const double t = 0.01 * k;
        sup = std::max(sup, std::abs(num.at(t)[0] - ref.at(t)[0]));
    }
    CHECK(sup <= 1e-3);
}
