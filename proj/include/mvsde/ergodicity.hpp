#pragma once

#include "mvsde/coefficients.hpp"
#include "mvsde/solver.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mvsde {

/// |N(0, scale^2)|.
struct HalfNormalLaw {
    double scale = 1.0;
};

struct NormalLaw {
    double mean = 0.0;
    double stddev = 1.0;
};

using ReferenceLaw = std::variant<HalfNormalLaw, NormalLaw>;

double reference_quantile(const ReferenceLaw& law, double u);

/// Deterministic inverse-CDF sample cloud at levels (i - 1/2)/n.
ParticleCloud reference_samples(const ReferenceLaw& law, int n);

/// Runs the sampled certification and throws CertificationError unless the
/// declared constants pass with lambda > 2*L2 declared dissipative.
void require_dissipative(const CoefficientSpec& spec, const AssumptionConstants& constants,
                         int sample_budget = 2000);

/// Certification without the dissipativity clause (growth + both square
/// hypotheses); used by the solution-convergence gate.
void require_certified(const CoefficientSpec& spec, const AssumptionConstants& constants,
                       int sample_budget = 2000);

struct ContractionSettings {
    double fit_lo = 0.0;
    double fit_hi = 0.0;
    double bound_tol = 0.5;  // pointwise slack factor (1 + tol)
    std::optional<double> max_fitted_slope;
};

struct ContractionReport {
    std::vector<double> times;
    std::vector<double> w2_values;
    std::vector<double> bounds;  // W2^2(mu0,nu0) * exp(-lambda t)
    double initial_w2 = 0.0;
    double declared_lambda = 0.0;
    double noise_floor = 0.0;
    double fitted_rate = 0.0;
    bool fit_available = false;
    double window_lo = 0.0;
    double window_hi = 0.0;
    bool pointwise_pass = true;
    bool slope_pass = true;
    std::string failure;

    bool passed() const { return pointwise_pass && slope_pass; }
};

/// Synchronous-coupling contraction run from two initial clouds; asserts the
/// pointwise exponential envelope above the noise floor and fits the decay
/// rate of log W2^2 on the requested window (diagnostic unless a slope bound
/// is set).
ContractionReport contraction_experiment(const SdeSystem& system, const ParticleCloud& mu0,
                                         const ParticleCloud& nu0, const SolverConfig& config,
                                         const AssumptionConstants& constants,
                                         const ContractionSettings& settings);

struct InvariantEstimate {
    ParticleCloud cloud{1, 1};
    bool pooled = false;
    double burn_in = 0.0;
    double horizon = 0.0;
    double second_moment = 0.0;  // squared 2-moment norm of the estimate
    std::uint64_t seed = 0;
};

/// Long-run estimate of the invariant measure: terminal cloud by default,
/// pooled post-burn-in cloud when `pooled` is set (quantile studies only).
InvariantEstimate estimate_invariant_measure(const SdeSystem& system, const SolverConfig& config,
                                             double burn_in, const AssumptionConstants& constants,
                                             bool pooled = false);

struct ErgodicityRow {
    double t = 0.0;
    double w2_sq = 0.0;
    double bound = 0.0;
};

struct ErgodicitySettings {
    double burn_in = 0.0;
    double transient_horizon = 0.0;
    double bound_tol = 0.5;
};

struct ErgodicityReport {
    std::vector<ErgodicityRow> rows;
    InvariantEstimate invariant;
    double noise_floor = 0.0;
    double nu0_second_moment = 0.0;
    bool pass = true;
    std::string failure;
};

/// Tabulates measured W2^2(P_t nu0, invariant estimate) against the decay
/// envelope 2(|nu0|_2^2 + |mu_inf|_2^2) e^{-lambda t} and asserts it above
/// the noise floor.
ErgodicityReport ergodicity_bound_experiment(const SdeSystem& system, const ParticleCloud& nu0,
                                             const SolverConfig& config,
                                             const AssumptionConstants& constants,
                                             const ErgodicitySettings& settings);

struct MomentRow {
    double horizon = 0.0;
    double moment_sup = 0.0;
};

struct UniformMomentReport {
    std::vector<MomentRow> rows;
    bool pass = true;
    std::string failure;
};

/// Second-moment sup over growing horizons from the origin point mass;
/// asserts the absence of a growth trend (within 20%).
UniformMomentReport uniform_moment_experiment(const SdeSystem& system, const SolverConfig& config,
                                              const std::vector<double>& horizons,
                                              const AssumptionConstants& constants);

/// W2 between the invariant estimate and inverse-CDF samples of a reference
/// law of the same size.
double reference_gap_w2(const InvariantEstimate& estimate, const ReferenceLaw& law);

// Derived-run seeds for noise-floor and independent-estimate runs.
std::uint64_t floor_seed_a(std::uint64_t seed);
std::uint64_t floor_seed_b(std::uint64_t seed);

}  // namespace mvsde
