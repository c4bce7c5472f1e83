#include "mvsde/solver.hpp"

#include "mvsde/rng.hpp"

#include <atomic>
#include <cmath>
#include <cstring>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace mvsde {

namespace {

constexpr double kDomainTol = 1e-9;

bool box_inside_domain(const ConvexSet& domain, const Vec& lower, const Vec& upper) {
    return std::visit([&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxSet>) {
            for (Eigen::Index i = 0; i < lower.size(); ++i) {
                if (lower[i] < s.lower[i] - kDomainTol || upper[i] > s.upper[i] + kDomainTol) {
                    return false;
                }
            }
            return true;
        }
        if constexpr (std::is_same_v<T, BallSet>) {
            double worst = 0.0;
            for (Eigen::Index i = 0; i < lower.size(); ++i) {
                const double a = std::abs(lower[i] - s.center[i]);
                const double b = std::abs(upper[i] - s.center[i]);
                const double m = std::max(a, b);
                worst += m * m;
            }
            return std::sqrt(worst) <= s.radius + kDomainTol;
        }
        if constexpr (std::is_same_v<T, HalfSpaceSet>) {
            double worst = 0.0;
            for (Eigen::Index i = 0; i < lower.size(); ++i) {
                worst += std::max(s.normal[i] * lower[i], s.normal[i] * upper[i]);
            }
            return worst <= s.offset + kDomainTol;
        }
    }, domain);
}

void check_initial_in_domain(const SdeSystem& system) {
    const ConvexSet* domain = system.op.domain_set();
    if (domain == nullptr) return;
    std::visit([&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, PointMassInit>) {
            if (!set_contains(*domain, law.x)) {
                throw ConfigError("initial point mass lies outside closure of the domain");
            }
        } else if constexpr (std::is_same_v<T, UniformBoxInit>) {
            if (!box_inside_domain(*domain, law.lower, law.upper)) {
                throw ConfigError("initial sampling box is not contained in the domain");
            }
        } else {
            for (int i = 0; i < law.cloud.size(); ++i) {
                if (!set_contains(*domain, law.cloud.point(i))) {
                    throw ConfigError("initial cloud has a point outside closure of the domain");
                }
            }
        }
    }, system.initial);
}

struct Workspace {
    Vec x, drift, dw, pre, next, field;
    Mat sigma;
};

// Per-system mutable simulation state.
struct Runtime {
    const SdeSystem* system = nullptr;
    Scheme scheme = Scheme::ResolventImplicit;
    double eps = 0.0;
    bool needs_bounded_mean = false;
    std::vector<double> state;  // N * d
    std::vector<double> kvar;   // N
    MeasureStats stats;
    std::vector<ParticleCloud> snapshots;
};

void compute_stats(Runtime& rt, int n, int d) {
    Vec mean = Vec::Zero(d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) mean[j] += rt.state[static_cast<std::size_t>(i) * d + j];
    }
    mean /= static_cast<double>(n);
    rt.stats.mean = std::move(mean);
    if (rt.needs_bounded_mean) {
        Vec bm = Vec::Zero(d);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) {
                bm[j] += std::tanh(rt.state[static_cast<std::size_t>(i) * d + j]);
            }
        }
        rt.stats.bounded_mean = bm / static_cast<double>(n);
    } else if (rt.stats.bounded_mean.size() != d) {
        rt.stats.bounded_mean = Vec::Zero(d);
    }
}

/// Updates particle i of runtime `rt` in place using increment `ws.dw`.
/// Returns false when the new state is non-finite.
bool update_particle(Runtime& rt, int i, double h, Workspace& ws) {
    const SdeSystem& sys = *rt.system;
    const int d = sys.op.dimension();
    double* slot = rt.state.data() + static_cast<std::size_t>(i) * d;
    ws.x = Eigen::Map<const Vec>(slot, d);

    eval_drift_into(sys.coefficients, ws.x, rt.stats, ws.drift);
    eval_diffusion_into(sys.coefficients, ws.x, rt.stats, ws.sigma);

    if (rt.scheme == Scheme::ResolventImplicit) {
        ws.pre = ws.x + h * ws.drift;
        ws.pre.noalias() += ws.sigma * ws.dw;
        resolvent_into(sys.op, h, ws.pre, ws.next, sys.op_shift);
        rt.kvar[static_cast<std::size_t>(i)] += (ws.pre - ws.next).norm();
    } else {
        yosida_into(sys.op, rt.eps, ws.x, ws.field, sys.op_shift);
        ws.next = ws.x - h * ws.field + h * ws.drift;
        ws.next.noalias() += ws.sigma * ws.dw;
        rt.kvar[static_cast<std::size_t>(i)] += ws.field.norm() * h;
    }

    bool finite = true;
    for (int j = 0; j < d; ++j) {
        slot[j] = ws.next[j];
        finite = finite && std::isfinite(slot[j]);
    }
    return finite;
}

std::vector<double> sample_initial_flat(const InitialLaw& initial, int n, int d,
                                        std::uint64_t seed) {
    std::vector<double> state(static_cast<std::size_t>(n) * d, 0.0);
    std::visit([&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, PointMassInit>) {
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < d; ++j) {
                    state[static_cast<std::size_t>(i) * d + j] = law.x[j];
                }
            }
        } else if constexpr (std::is_same_v<T, UniformBoxInit>) {
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < d; ++j) {
                    const double u = rng::uniform01(seed, rng::stream_id(rng::Stream::InitialLaw),
                                                    static_cast<std::uint64_t>(i),
                                                    static_cast<std::uint64_t>(j), 0);
                    state[static_cast<std::size_t>(i) * d + j] =
                        law.lower[j] + (law.upper[j] - law.lower[j]) * u;
                }
            }
        } else {
            std::memcpy(state.data(), law.cloud.flat().data(), state.size() * sizeof(double));
        }
    }, initial);
    return state;
}

void sample_initial(Runtime& rt, const SolverConfig& cfg, int d) {
    rt.state = sample_initial_flat(rt.system->initial, cfg.particles, d, cfg.seed);
}

void record_snapshot(Runtime& rt, int d) {
    std::vector<double> copy = rt.state;
    rt.snapshots.push_back(ParticleCloud::from_flat(d, std::move(copy)));
}

std::vector<TrajectoryEnsemble> run_lockstep(const std::vector<const SdeSystem*>& systems,
                                             const std::vector<SolverConfig>& configs) {
    const SolverConfig& lead = configs.front();
    const int n = lead.particles;
    const int d = systems.front()->op.dimension();
    const int m = systems.front()->coefficients.noise_dim();
    const std::int64_t steps = step_count(lead);
    const double h = lead.step;
    const double sqrt_h = std::sqrt(h);

    std::vector<Runtime> runtimes(systems.size());
    for (std::size_t s = 0; s < systems.size(); ++s) {
        Runtime& rt = runtimes[s];
        rt.system = systems[s];
        rt.scheme = configs[s].scheme;
        rt.eps = configs[s].penalization;
        rt.needs_bounded_mean =
            std::holds_alternative<BoundedKernelDrift>(systems[s]->coefficients.drift);
        rt.kvar.assign(static_cast<std::size_t>(n), 0.0);
        sample_initial(rt, configs[s], d);
        compute_stats(rt, n, d);
        record_snapshot(rt, d);
    }

    int max_threads = std::max(1, lead.threads);
#if !defined(_OPENMP)
    max_threads = 1;
#endif
    std::vector<std::vector<Workspace>> workspaces(systems.size());
    for (auto& ws : workspaces) {
        ws.resize(static_cast<std::size_t>(max_threads));
        for (auto& w : ws) {
            w.x.resize(d);
            w.drift.resize(d);
            w.dw.resize(m);
            w.pre.resize(d);
            w.next.resize(d);
            w.field.resize(d);
        }
    }

    std::vector<double> times;
    times.push_back(0.0);

    for (std::int64_t k = 0; k < steps; ++k) {
        for (auto& rt : runtimes) compute_stats(rt, n, d);

        std::atomic<bool> bad{false};
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(max_threads)
#endif
        for (int i = 0; i < n; ++i) {
#if defined(_OPENMP)
            const int tid = omp_get_thread_num();
#else
            const int tid = 0;
#endif
            Workspace& lead_ws = workspaces[0][static_cast<std::size_t>(tid)];
            for (int j = 0; j < m; ++j) {
                lead_ws.dw[j] = sqrt_h * rng::normal(lead.seed, rng::stream_id(rng::Stream::Noise),
                                                     static_cast<std::uint64_t>(i),
                                                     static_cast<std::uint64_t>(k),
                                                     static_cast<std::uint64_t>(j));
            }
            for (std::size_t s = 0; s < runtimes.size(); ++s) {
                Workspace& ws = workspaces[s][static_cast<std::size_t>(tid)];
                if (s != 0) ws.dw = lead_ws.dw;
                if (!update_particle(runtimes[s], i, h, ws)) {
                    bad.store(true, std::memory_order_relaxed);
                }
            }
        }
        if (bad.load()) {
            throw InstabilityError("non-finite state encountered at step " + std::to_string(k + 1),
                                   k + 1);
        }

        const std::int64_t done = k + 1;
        if (done % lead.record_stride == 0 || done == steps) {
            times.push_back(static_cast<double>(done) * h);
            for (auto& rt : runtimes) record_snapshot(rt, d);
        }
    }

    std::vector<TrajectoryEnsemble> out;
    out.reserve(runtimes.size());
    for (std::size_t s = 0; s < runtimes.size(); ++s) {
        TrajectoryEnsemble ens;
        ens.times = times;
        ens.snapshots = std::move(runtimes[s].snapshots);
        ens.reflection_variation = std::move(runtimes[s].kvar);
        ens.config = configs[s];
        out.push_back(std::move(ens));
    }
    return out;
}

}  // namespace

int initial_dim(const InitialLaw& law) {
    return std::visit([](const auto& l) -> int {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, PointMassInit>) return static_cast<int>(l.x.size());
        if constexpr (std::is_same_v<T, UniformBoxInit>) return static_cast<int>(l.lower.size());
        if constexpr (std::is_same_v<T, CloudInit>) return l.cloud.dim();
    }, law);
}

std::int64_t step_count(const SolverConfig& config) {
    const double ratio = config.horizon / config.step;
    const std::int64_t steps = std::llround(ratio);
    if (std::abs(static_cast<double>(steps) * config.step - config.horizon) >
        1e-9 * std::max(1.0, config.horizon)) {
        throw ConfigError("horizon T must be an integer multiple of the step size h");
    }
    return steps;
}

void validate(const SdeSystem& system, const SolverConfig& config) {
    system.coefficients.validate();
    const int d = system.op.dimension();
    if (system.coefficients.state_dim() != d) {
        throw ConfigError("operator and coefficient dimensions disagree");
    }
    if (initial_dim(system.initial) != d) {
        throw ConfigError("initial law dimension disagrees with the operator");
    }
    if (!(system.op_shift >= 0.0)) throw ConfigError("operator shift must be nonnegative");
    if (!(config.step > 0.0)) throw ConfigError("step size h must be positive");
    if (!(config.horizon >= 0.0)) throw ConfigError("horizon T must be nonnegative");
    if (config.horizon > 0.0 && config.step > config.horizon + 1e-12) {
        throw ConfigError("step size h must not exceed the horizon T");
    }
    if (config.particles < 1) throw ConfigError("particle count N must be positive");
    if (config.particles < 2 && system.coefficients.measure_dependent()) {
        throw ConfigError("mean-field coefficients require at least N = 2 particles");
    }
    if (config.record_stride < 1) throw ConfigError("record stride must be positive");
    if (config.scheme == Scheme::YosidaExplicit) {
        if (!(config.penalization > 0.0)) {
            throw ConfigError("the explicit scheme requires a positive penalization epsilon");
        }
        if (config.step > config.penalization / 2.0 + 1e-15) {
            throw ConfigError("explicit-scheme stability requires h <= epsilon/2");
        }
    }
    if (const auto* box = std::get_if<UniformBoxInit>(&system.initial)) {
        for (Eigen::Index i = 0; i < box->lower.size(); ++i) {
            if (!(box->lower[i] <= box->upper[i])) {
                throw ConfigError("initial sampling box has lower > upper");
            }
        }
    }
    if (const auto* cl = std::get_if<CloudInit>(&system.initial)) {
        if (cl->cloud.size() != config.particles) {
            throw ConfigError("initial cloud size must equal the particle count N");
        }
    }
    check_initial_in_domain(system);
    step_count(config);
}

TrajectoryEnsemble simulate(const SdeSystem& system, const SolverConfig& config) {
    validate(system, config);
    auto out = run_lockstep({&system}, {config});
    return std::move(out.front());
}

CoupledRun simulate_coupled(const SdeSystem& a, const SdeSystem& b, const SolverConfig& config) {
    return simulate_coupled(a, config, b, config);
}

CoupledRun simulate_coupled(const SdeSystem& a, const SolverConfig& config_a, const SdeSystem& b,
                            const SolverConfig& config_b) {
    validate(a, config_a);
    validate(b, config_b);
    if (a.op.dimension() != b.op.dimension() ||
        a.coefficients.noise_dim() != b.coefficients.noise_dim()) {
        throw ConfigError("coupled systems must share state and noise dimensions");
    }
    if (config_a.particles != config_b.particles || config_a.step != config_b.step ||
        config_a.horizon != config_b.horizon || config_a.seed != config_b.seed ||
        config_a.record_stride != config_b.record_stride ||
        config_a.threads != config_b.threads) {
        throw ConfigError("coupled runs must share N, h, T, seed, stride and threads");
    }
    auto out = run_lockstep({&a, &b}, {config_a, config_b});
    return {std::move(out[0]), std::move(out[1])};
}

double moment_sup(const TrajectoryEnsemble& ensemble, int p) {
    if (p < 1) throw ConfigError("moment_sup requires p >= 1");
    if (ensemble.snapshots.empty()) throw ConfigError("moment_sup requires a nonempty ensemble");
    double worst = 0.0;
    for (const auto& cloud : ensemble.snapshots) {
        double acc = 0.0;
        for (int i = 0; i < cloud.size(); ++i) {
            acc += std::pow(cloud.point(i).squaredNorm(), p);
        }
        worst = std::max(worst, acc / static_cast<double>(cloud.size()));
    }
    return worst;
}

namespace {

ParticleCloud single_step(const ParticleCloud& state, const SdeSystem& system, Scheme scheme,
                          double eps, double h, const std::vector<Vec>& noise) {
    const int d = system.op.dimension();
    const int m = system.coefficients.noise_dim();
    if (state.dim() != d) throw ConfigError("step: state dimension mismatch");
    if (static_cast<int>(noise.size()) != state.size()) {
        throw ConfigError("step: one noise increment per particle is required");
    }
    for (const Vec& dw : noise) {
        if (dw.size() != m) throw ConfigError("step: noise increment dimension mismatch");
    }
    if (!(h > 0.0)) throw ConfigError("step: h must be positive");
    if (scheme == Scheme::YosidaExplicit) {
        if (!(eps > 0.0)) throw ConfigError("step: epsilon must be positive");
        if (h > eps / 2.0 + 1e-15) {
            throw ConfigError("explicit-scheme stability requires h <= epsilon/2");
        }
    }

    Runtime rt;
    rt.system = &system;
    rt.scheme = scheme;
    rt.eps = eps;
    rt.needs_bounded_mean = std::holds_alternative<BoundedKernelDrift>(system.coefficients.drift);
    rt.kvar.assign(static_cast<std::size_t>(state.size()), 0.0);
    rt.state.assign(state.flat().begin(), state.flat().end());
    compute_stats(rt, state.size(), d);

    Workspace ws;
    ws.x.resize(d);
    ws.drift.resize(d);
    ws.pre.resize(d);
    ws.next.resize(d);
    ws.field.resize(d);
    for (int i = 0; i < state.size(); ++i) {
        ws.dw = noise[static_cast<std::size_t>(i)];
        if (!update_particle(rt, i, h, ws)) {
            throw InstabilityError("non-finite state after a single step", 1);
        }
    }
    return ParticleCloud::from_flat(d, std::move(rt.state));
}

}  // namespace

ParticleCloud step_yosida_explicit(const ParticleCloud& state, const SdeSystem& system, double eps,
                                   double h, const std::vector<Vec>& noise) {
    return single_step(state, system, Scheme::YosidaExplicit, eps, h, noise);
}

ParticleCloud step_resolvent_implicit(const ParticleCloud& state, const SdeSystem& system,
                                      double h, const std::vector<Vec>& noise) {
    return single_step(state, system, Scheme::ResolventImplicit, h, h, noise);
}

ParticleCloud materialize_initial_cloud(const InitialLaw& initial, int particles,
                                        std::uint64_t seed) {
    if (particles < 1) throw ConfigError("materialize_initial_cloud requires N >= 1");
    const int d = initial_dim(initial);
    if (const auto* cl = std::get_if<CloudInit>(&initial)) {
        if (cl->cloud.size() != particles) {
            throw ConfigError("initial cloud size must equal the particle count N");
        }
        return cl->cloud;
    }
    return ParticleCloud::from_flat(d, sample_initial_flat(initial, particles, d, seed));
}

}  // namespace mvsde
