#pragma once

#include "spavg/bounds.hpp"
#include "spavg/integrate.hpp"
#include "spavg/model.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace spavg {

/// A point of B_R(0) x M x [0, eps1].
struct JointPoint {
    Vec x;
    Vec z;
    double eps = 0.0;
};

using JointPair = std::pair<JointPoint, JointPoint>;

/// Half the pairs are independent uniform draws, half are clustered (second
/// point within 1e-3 of the first). Points in the excluded region are redrawn.
[[nodiscard]] std::vector<JointPair> sample_joint_pairs(const SystemSpec& sys, const DomainSpec& dom,
                                                        std::size_t n_pairs, double eps_max, std::mt19937_64& rng);

/// max over pairs of |f(p) - f(q)| / |p - q| and the same for g (no safety factor).
[[nodiscard]] double max_difference_quotient(const SystemSpec& sys, const std::vector<JointPair>& pairs);

/// Sampled estimate; `value = raw * safety`.
struct Estimate {
    double raw = 0.0;
    double safety = 1.0;
    double value = 0.0;
    std::uint64_t seed = 0;
};

/// Lipschitz constant of f and g on B_R(0) x M x [0, eps_max]; safety 1.2.
[[nodiscard]] Estimate estimate_lipschitz(const SystemSpec& sys, const DomainSpec& dom, std::size_t n_pairs,
                                          double eps_max, std::uint64_t seed);

/// max(|f|, |g|) over uniform samples of B_R(0) x M x [0, eps_max]; safety 1.1.
[[nodiscard]] Estimate estimate_bound_P(const SystemSpec& sys, const DomainSpec& dom, std::size_t n_samples,
                                        double eps_max, std::uint64_t seed);

/// Lipschitz constant of f_av on B_R(0) in R^n; safety 1.2.
[[nodiscard]] Estimate estimate_lav(const SlowField& f_av, std::size_t n, double R, std::size_t n_pairs,
                                    std::uint64_t seed);

struct DecayFit {
    double r_y = 1.0;
    double beta_y = 0.0;
    double rms_residual = 0.0;                 // of ln(dist/dist0) against each run's own line
    std::vector<std::pair<double, double>> runs;  // per run (intercept, slope) of ln(dist/dist0) = a - b tau
};

/// Fits ln(dist(tau)/dist(0)) = ln r_y - beta_y tau per run over samples after
/// the first with dist >= 1e-8 and returns the envelope: largest r_y (at least 1, raised if
/// needed so every window sample lies under the envelope within 1e-6),
/// smallest beta_y. Throws Error(Assumption) on a run that does not decay.
[[nodiscard]] DecayFit fit_exponential_decay(const std::vector<Trajectory>& runs, const AttractorSpec& att);

struct EstimateOptions {
    std::size_t n_pairs = 20'000;
    std::size_t n_samples = 20'000;
    std::size_t n_decay_runs = 8;
    double decay_tau = 10.0;
    double T = 10.0;
    std::uint64_t seed = 42;
};

/// Full ConstantSet for a system bundle. L_av comes from the closed-form
/// average when the system has one, otherwise from the supplied field.
[[nodiscard]] ConstantSet estimate_constants(const SystemBundle& b, const EstimateOptions& opts,
                                             const SlowField& f_av = {});

/// `key = value` lines; '#' starts a comment.
[[nodiscard]] std::string constants_to_text(const ConstantSet& c);
/// Throws Error(Config) on unknown keys or malformed values.
[[nodiscard]] ConstantSet constants_from_text(std::string_view text);

}  // namespace spavg
