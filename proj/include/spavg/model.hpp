#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace spavg {

using Vec = std::vector<double>;

/// (x, z, eps) -> R^k. Must be deterministic and thread-safe.
using VectorField = std::function<Vec(std::span<const double> x, std::span<const double> z, double eps)>;
using SlowField = std::function<Vec(std::span<const double> x)>;

/// Points of R^m where g is undefined. A point is excluded when
/// `clearance(z) < min_clearance`.
struct ExcludedRegion {
    std::function<double(std::span<const double> z)> clearance;
    double min_clearance = 1e-9;

    [[nodiscard]] bool contains(std::span<const double> z) const {
        return clearance && clearance(z) < min_clearance;
    }
};

/// Slow/fast pair  x' = f(x,z,eps),  eps z' = g(x,z,eps).
struct SystemSpec {
    std::string name;
    std::size_t n = 0;
    std::size_t m = 0;
    VectorField f;
    VectorField g;
    std::optional<ExcludedRegion> excluded;
    /// Closed-form average field, when the system knows it.
    SlowField f_av;
    /// Closed-form averaging envelope gamma(s), when known.
    std::function<double(double)> gamma;
};

/// Compact fast domain M: an annulus {a <= |z - c| <= b} or an axis-aligned box.
class FastDomain {
public:
    enum class Shape { Annulus, Box };

    static FastDomain annulus(Vec center, double inner, double outer);
    static FastDomain box(Vec lo, Vec hi);

    [[nodiscard]] Shape shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t dim() const noexcept { return shape_ == Shape::Annulus ? center_.size() : lo_.size(); }
    [[nodiscard]] bool contains(std::span<const double> z, double slack = 0.0) const;
    /// Uniform sample (uniform in volume).
    [[nodiscard]] Vec sample(std::mt19937_64& rng) const;
    /// max_{z in M} |z|
    [[nodiscard]] double max_norm() const;

    [[nodiscard]] const Vec& center() const noexcept { return center_; }
    [[nodiscard]] double inner() const noexcept { return inner_; }
    [[nodiscard]] double outer() const noexcept { return outer_; }
    [[nodiscard]] const Vec& lo() const noexcept { return lo_; }
    [[nodiscard]] const Vec& hi() const noexcept { return hi_; }

private:
    Shape shape_ = Shape::Box;
    Vec center_;
    double inner_ = 0.0;
    double outer_ = 0.0;
    Vec lo_;
    Vec hi_;
};

struct DomainSpec {
    double R = 1.0;  // slow ball B_R(0)
    FastDomain M = FastDomain::box({-1.0}, {1.0});
    double eps1 = 0.1;

    [[nodiscard]] bool slow_contains(std::span<const double> x, double slack = 0.0) const;
    /// Uniform sample from B_R(0) in R^n.
    [[nodiscard]] Vec sample_slow(std::size_t n, std::mt19937_64& rng) const;
};

/// Distance to the bounded attracting set of the boundary layer.
struct AttractorSpec {
    std::function<double(std::span<const double> z)> dist;
    std::string description;
};

struct SystemBundle {
    SystemSpec sys;
    DomainSpec dom;
    AttractorSpec att;
};

struct RhsValue {
    Vec dx;
    Vec dz;
};

/// Throws DomainError when z lies in the excluded region of `sys`.
void check_fast_point(const SystemSpec& sys, std::span<const double> z);

/// Right-hand side of the full system in slow time: (f, g/eps).
RhsValue eval_rhs_full(const SystemSpec& sys, std::span<const double> x, std::span<const double> z, double eps);

/// The two-dimensional limit-cycle example: x' = -x + z1 + eps x^2 with a fast
/// oscillator attracted to the unit circle, on R = 2.5, M = {0.5 <= |z| <= 1.5},
/// eps1 = 0.15, dist(z) = | |z| - 1 |.
SystemBundle builtin_example();

/// Closed-form boundary-layer solution of the built-in example.
Vec example_boundary_closed_form(std::span<const double> z0, double tau);

/// Scalar linear system x' = -x, eps z' = -z (z does not enter f).
SystemBundle builtin_linear();

using SystemFactory = std::function<SystemBundle()>;

/// Plug-in registry. Built-ins "example" and "linear" are always present.
void register_system(const std::string& name, SystemFactory factory);
[[nodiscard]] SystemBundle make_system(const std::string& name);
[[nodiscard]] std::vector<std::string> system_names();

}  // namespace spavg
