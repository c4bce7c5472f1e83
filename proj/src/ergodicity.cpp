#include "mvsde/ergodicity.hpp"

#include "mvsde/rng.hpp"
#include "mvsde/wasserstein.hpp"

#include <cmath>
#include <sstream>

namespace mvsde {

namespace {

// A measured value is asserted only while it dominates the finite-N floor.
constexpr double kFloorMultiple = 4.0;

SdeSystem with_initial(const SdeSystem& system, ParticleCloud cloud) {
    SdeSystem out = system;
    out.initial = CloudInit{std::move(cloud)};
    return out;
}

double snapshot_w2(const ParticleCloud& a, const ParticleCloud& b) { return w2_distance(a, b); }

}  // namespace

double reference_quantile(const ReferenceLaw& law, double u) {
    if (!(u > 0.0 && u < 1.0)) throw ConfigError("reference quantile level must be in (0,1)");
    return std::visit([&](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, HalfNormalLaw>) {
            return l.scale * rng::normal_quantile(0.5 * (u + 1.0));
        } else {
            return l.mean + l.stddev * rng::normal_quantile(u);
        }
    }, law);
}

ParticleCloud reference_samples(const ReferenceLaw& law, int n) {
    if (n < 1) throw ConfigError("reference sample count must be positive");
    ParticleCloud cloud(1, n);
    Vec x(1);
    for (int i = 0; i < n; ++i) {
        x[0] = reference_quantile(law, (static_cast<double>(i) + 0.5) / n);
        cloud.set_point(i, x);
    }
    return cloud;
}

void require_dissipative(const CoefficientSpec& spec, const AssumptionConstants& constants,
                         int sample_budget) {
    if (!constants.dissipative) {
        throw CertificationError("experiment requires constants declared dissipative (L3/L4)");
    }
    if (!(constants.lambda() > 2.0 * constants.l2)) {
        throw CertificationError("dissipativity requires lambda = L4 - L3 > 2*L2");
    }
    const CertificationReport report = certify_hypotheses(spec, constants, sample_budget);
    if (!report.passed()) {
        throw CertificationError("hypothesis certification failed:\n" + report.summary());
    }
}

void require_certified(const CoefficientSpec& spec, const AssumptionConstants& constants,
                       int sample_budget) {
    AssumptionConstants weak = constants;
    weak.dissipative = false;
    const CertificationReport report = certify_hypotheses(spec, weak, sample_budget);
    if (!report.passed()) {
        throw CertificationError("hypothesis certification failed:\n" + report.summary());
    }
}

std::uint64_t floor_seed_a(std::uint64_t seed) { return rng::mix64(seed ^ 0x666c6f6f722d61ULL); }
std::uint64_t floor_seed_b(std::uint64_t seed) { return rng::mix64(seed ^ 0x666c6f6f722d62ULL); }

ContractionReport contraction_experiment(const SdeSystem& system, const ParticleCloud& mu0,
                                         const ParticleCloud& nu0, const SolverConfig& config,
                                         const AssumptionConstants& constants,
                                         const ContractionSettings& settings) {
    require_dissipative(system.coefficients, constants);
    if (mu0.size() != config.particles || nu0.size() != config.particles) {
        throw ConfigError("contraction initial clouds must have N points each");
    }

    const SdeSystem sys_a = with_initial(system, mu0);
    const SdeSystem sys_b = with_initial(system, nu0);
    const CoupledRun run = simulate_coupled(sys_a, sys_b, config);

    ContractionReport report;
    report.declared_lambda = constants.lambda();
    report.times = run.first.times;
    report.w2_values.reserve(report.times.size());
    for (std::size_t k = 0; k < report.times.size(); ++k) {
        report.w2_values.push_back(snapshot_w2(run.first.snapshots[k], run.second.snapshots[k]));
    }
    report.initial_w2 = report.w2_values.front();

    // Finite-N floor: W2 between independent same-law terminal clouds.
    SolverConfig floor_cfg = config;
    floor_cfg.seed = floor_seed_a(config.seed);
    const TrajectoryEnsemble floor_run = simulate(sys_a, floor_cfg);
    report.noise_floor = snapshot_w2(run.first.terminal(), floor_run.terminal());

    const double w2sq0 = report.initial_w2 * report.initial_w2;
    std::ostringstream failure;
    for (std::size_t k = 0; k < report.times.size(); ++k) {
        const double t = report.times[k];
        const double bound = w2sq0 * std::exp(-report.declared_lambda * t);
        report.bounds.push_back(bound);
        const double w2 = report.w2_values[k];
        if (w2 < kFloorMultiple * report.noise_floor) continue;
        if (w2 * w2 > bound * (1.0 + settings.bound_tol)) {
            report.pointwise_pass = false;
            failure << "pointwise envelope violated at t=" << t << ": W2^2=" << w2 * w2
                    << " > " << bound * (1.0 + settings.bound_tol) << "; ";
        }
    }

    // Least-squares slope of log W2^2 over the window, above the floor.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    report.window_lo = settings.fit_hi;
    report.window_hi = settings.fit_lo;
    for (std::size_t k = 0; k < report.times.size(); ++k) {
        const double t = report.times[k];
        const double w2 = report.w2_values[k];
        if (t < settings.fit_lo || t > settings.fit_hi) continue;
        if (w2 < kFloorMultiple * report.noise_floor || w2 <= 0.0) continue;
        const double y = std::log(w2 * w2);
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        ++count;
        report.window_lo = std::min(report.window_lo, t);
        report.window_hi = std::max(report.window_hi, t);
    }
    if (count >= 2 && sxx * count - sx * sx > 0.0) {
        report.fitted_rate = (count * sxy - sx * sy) / (count * sxx - sx * sx);
        report.fit_available = true;
    }
    if (settings.max_fitted_slope.has_value()) {
        if (!report.fit_available) {
            report.slope_pass = false;
            failure << "slope bound requested but the fit window has no usable points; ";
        } else if (report.fitted_rate > *settings.max_fitted_slope) {
            report.slope_pass = false;
            failure << "fitted slope " << report.fitted_rate << " exceeds "
                    << *settings.max_fitted_slope << "; ";
        }
    }
    report.failure = failure.str();
    return report;
}

InvariantEstimate estimate_invariant_measure(const SdeSystem& system, const SolverConfig& config,
                                             double burn_in, const AssumptionConstants& constants,
                                             bool pooled) {
    require_dissipative(system.coefficients, constants);
    if (!(burn_in >= 0.0 && burn_in < config.horizon)) {
        throw ConfigError("invariant estimation requires 0 <= burn_in < T");
    }
    const TrajectoryEnsemble run = simulate(system, config);

    InvariantEstimate estimate{run.terminal(), false, burn_in, config.horizon, 0.0, config.seed};
    if (pooled) {
        std::vector<double> flat;
        for (std::size_t k = 0; k < run.times.size(); ++k) {
            if (run.times[k] < burn_in) continue;
            const auto span = run.snapshots[k].flat();
            flat.insert(flat.end(), span.begin(), span.end());
        }
        estimate.cloud = ParticleCloud::from_flat(run.terminal().dim(), std::move(flat));
        estimate.pooled = true;
    }
    estimate.second_moment = estimate.cloud.second_moment();
    return estimate;
}

ErgodicityReport ergodicity_bound_experiment(const SdeSystem& system, const ParticleCloud& nu0,
                                             const SolverConfig& config,
                                             const AssumptionConstants& constants,
                                             const ErgodicitySettings& settings) {
    if (nu0.size() != config.particles) {
        throw ConfigError("ergodicity initial cloud must have N points");
    }

    ErgodicityReport report;
    report.invariant =
        estimate_invariant_measure(system, config, settings.burn_in, constants, false);
    report.nu0_second_moment = nu0.second_moment();

    SolverConfig floor_cfg = config;
    floor_cfg.seed = floor_seed_a(config.seed);
    const InvariantEstimate second =
        estimate_invariant_measure(system, floor_cfg, settings.burn_in, constants, false);
    report.noise_floor = snapshot_w2(report.invariant.cloud, second.cloud);

    SolverConfig transient_cfg = config;
    transient_cfg.horizon = settings.transient_horizon;
    const TrajectoryEnsemble transient = simulate(with_initial(system, nu0), transient_cfg);

    const double lambda = constants.lambda();
    const double level = 2.0 * (report.nu0_second_moment + report.invariant.second_moment);
    std::ostringstream failure;
    for (std::size_t k = 0; k < transient.times.size(); ++k) {
        const double t = transient.times[k];
        const double w2 = snapshot_w2(transient.snapshots[k], report.invariant.cloud);
        const double bound = level * std::exp(-lambda * t);
        report.rows.push_back({t, w2 * w2, bound});
        const bool assertable = (k == 0) || w2 >= kFloorMultiple * report.noise_floor;
        if (assertable && w2 * w2 > bound * (1.0 + settings.bound_tol)) {
            report.pass = false;
            failure << "ergodicity envelope violated at t=" << t << ": W2^2=" << w2 * w2 << " > "
                    << bound * (1.0 + settings.bound_tol) << "; ";
        }
    }
    report.failure = failure.str();
    return report;
}

UniformMomentReport uniform_moment_experiment(const SdeSystem& system, const SolverConfig& config,
                                              const std::vector<double>& horizons,
                                              const AssumptionConstants& constants) {
    require_dissipative(system.coefficients, constants);
    const auto* point = std::get_if<PointMassInit>(&system.initial);
    if (point == nullptr || point->x.norm() > 1e-12) {
        throw ConfigError("the uniform-moment experiment starts from the origin point mass");
    }
    if (horizons.empty()) throw ConfigError("uniform-moment experiment needs horizons");
    for (std::size_t k = 1; k < horizons.size(); ++k) {
        if (!(horizons[k] > horizons[k - 1])) {
            throw ConfigError("horizons must be strictly increasing");
        }
    }

    SolverConfig run_cfg = config;
    run_cfg.horizon = horizons.back();
    const TrajectoryEnsemble run = simulate(system, run_cfg);

    UniformMomentReport report;
    for (const double horizon : horizons) {
        double sup = 0.0;
        for (std::size_t k = 0; k < run.times.size(); ++k) {
            if (run.times[k] > horizon + 1e-12) break;
            sup = std::max(sup, run.snapshots[k].second_moment());
        }
        report.rows.push_back({horizon, sup});
    }
    const double first = report.rows.front().moment_sup;
    const double last = report.rows.back().moment_sup;
    if (last > 1.2 * first + 1e-9) {
        report.pass = false;
        std::ostringstream oss;
        oss << "second-moment sup grew from " << first << " to " << last
            << " across the horizon list";
        report.failure = oss.str();
    }
    return report;
}

double reference_gap_w2(const InvariantEstimate& estimate, const ReferenceLaw& law) {
    if (estimate.cloud.dim() != 1) {
        throw ConfigError("reference-law comparison requires a one-dimensional cloud");
    }
    return w2_sorted_1d(estimate.cloud, reference_samples(law, estimate.cloud.size())).value;
}

}  // namespace mvsde
