#pragma once

#include "mvsde/cloud.hpp"
#include "mvsde/coefficients.hpp"
#include "mvsde/operators.hpp"
#include "mvsde/types.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace mvsde {

enum class Scheme { ResolventImplicit, YosidaExplicit };

struct PointMassInit {
    Vec x;
};

struct UniformBoxInit {
    Vec lower;
    Vec upper;
};

struct CloudInit {
    ParticleCloud cloud;
};

using InitialLaw = std::variant<PointMassInit, UniformBoxInit, CloudInit>;

int initial_dim(const InitialLaw& law);

/// Full problem instance: multivalued operator (optionally shifted by
/// op_shift * identity), coefficients, and the initial law supported in
/// closure(D(A)).
struct SdeSystem {
    OperatorSpec op;
    double op_shift = 0.0;
    CoefficientSpec coefficients;
    InitialLaw initial;
};

struct SolverConfig {
    Scheme scheme = Scheme::ResolventImplicit;
    double penalization = 0.0;  // epsilon; required by the explicit scheme
    double step = 1e-3;         // h; horizon must be an integer multiple
    int particles = 100;        // N
    double horizon = 1.0;       // T
    std::uint64_t seed = 0;
    int record_stride = 1;      // snapshots every record_stride steps
    int threads = 1;            // must not change results
};

/// Throws ConfigError on invariant violations (explicit-scheme stability
/// h <= eps/2, initial law outside the domain, dimension mismatches, ...).
void validate(const SdeSystem& system, const SolverConfig& config);

std::int64_t step_count(const SolverConfig& config);

struct TrajectoryEnsemble {
    std::vector<double> times;
    std::vector<ParticleCloud> snapshots;
    std::vector<double> reflection_variation;  // per particle, nondecreasing in T
    SolverConfig config;

    const ParticleCloud& terminal() const { return snapshots.back(); }
};

/// Iterates the configured scheme from t = 0 to T with the empirical measure
/// frozen at step start. Identical (system, config) produce bit-identical
/// ensembles for any thread count. Throws InstabilityError when a state goes
/// non-finite.
TrajectoryEnsemble simulate(const SdeSystem& system, const SolverConfig& config);

struct CoupledRun {
    TrajectoryEnsemble first;
    TrajectoryEnsemble second;
};

/// Two systems driven by identical Brownian increments keyed by
/// (seed, particle, step).
CoupledRun simulate_coupled(const SdeSystem& a, const SdeSystem& b, const SolverConfig& config);

/// Synchronous coupling with per-system scheme/penalization; N, h, T, seed,
/// stride and threads must match.
CoupledRun simulate_coupled(const SdeSystem& a, const SolverConfig& config_a, const SdeSystem& b,
                            const SolverConfig& config_b);

/// max over recorded times of (1/N) sum |X_i|^{2p}, p >= 1.
double moment_sup(const TrajectoryEnsemble& ensemble, int p);

/// One explicit penalized Euler step; all particles see the cloud passed in.
ParticleCloud step_yosida_explicit(const ParticleCloud& state, const SdeSystem& system, double eps,
                                   double h, const std::vector<Vec>& noise);

/// One backward-resolvent step: X' = J_h(X + b h + sigma dW).
ParticleCloud step_resolvent_implicit(const ParticleCloud& state, const SdeSystem& system,
                                      double h, const std::vector<Vec>& noise);

/// Realizes an initial law as an N-point cloud, using the same keyed draws as
/// the solver so that CloudInit(materialized) and the law itself coincide.
ParticleCloud materialize_initial_cloud(const InitialLaw& initial, int particles,
                                        std::uint64_t seed);

}  // namespace mvsde
