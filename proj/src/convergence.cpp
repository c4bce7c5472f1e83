#include "mvsde/convergence.hpp"

#include "mvsde/wasserstein.hpp"

#include <cmath>
#include <sstream>

namespace mvsde {

namespace {

double ensemble_sup_mse(const TrajectoryEnsemble& a, const TrajectoryEnsemble& b) {
    double sup = 0.0;
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
        const auto fa = a.snapshots[k].flat();
        const auto fb = b.snapshots[k].flat();
        const int n = a.snapshots[k].size();
        const int d = a.snapshots[k].dim();
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            double sq = 0.0;
            for (int j = 0; j < d; ++j) {
                const double gap = fa[static_cast<std::size_t>(i) * d + j] -
                                   fb[static_cast<std::size_t>(i) * d + j];
                sq += gap * gap;
            }
            acc += sq;
        }
        sup = std::max(sup, acc / static_cast<double>(n));
    }
    return sup;
}

struct TrendOutcome {
    bool monotone = true;
    bool final_ok = true;
    std::string message;
};

TrendOutcome check_trend(const std::vector<double>& values, const TrendSettings& trend,
                         const char* label) {
    TrendOutcome out;
    std::ostringstream oss;
    for (std::size_t k = 1; k < values.size(); ++k) {
        if (values[k] > values[k - 1] * (1.0 + trend.pair_slack) + 1e-18) {
            out.monotone = false;
            oss << label << " not nonincreasing at position " << k << " (" << values[k - 1]
                << " -> " << values[k] << "); ";
        }
    }
    if (trend.final_ratio_max.has_value() &&
        values.back() > *trend.final_ratio_max * values.front() + 1e-18) {
        out.final_ok = false;
        oss << label << " final value " << values.back() << " exceeds " << *trend.final_ratio_max
            << " of the first value " << values.front() << "; ";
    }
    if (trend.final_abs_max.has_value() && values.back() > *trend.final_abs_max) {
        out.final_ok = false;
        oss << label << " final value " << values.back() << " exceeds " << *trend.final_abs_max
            << "; ";
    }
    out.message = oss.str();
    return out;
}

}  // namespace

SdeSystem system_at(const SequenceSystem& seq, std::optional<int> n) {
    SdeSystem sys{seq.operators.base, 0.0, seq.coefficients, seq.initial};
    if (n.has_value()) {
        sys.op_shift = seq.operators.shift_at(*n);
        sys.coefficients = seq.coefficients.at_index(*n);
    }
    return sys;
}

ConvergenceReport solution_convergence_experiment(const SequenceSystem& seq,
                                                  const SolverConfig& config,
                                                  const AssumptionConstants& constants,
                                                  const TrendSettings& trend) {
    if (seq.indices.empty()) throw ConfigError("solution convergence requires an index list");
    require_certified(seq.coefficients, constants);
    for (const int n : seq.indices) {
        require_certified(seq.coefficients.at_index(n), constants);
    }

    // The shared initial cloud realizes X_0 = X^n_0 for every pair.
    const ParticleCloud shared =
        materialize_initial_cloud(seq.initial, config.particles, config.seed);

    ConvergenceReport report;
    for (const int n : seq.indices) {
        SdeSystem indexed = system_at(seq, n);
        SdeSystem limit = system_at(seq, std::nullopt);
        indexed.initial = CloudInit{shared};
        limit.initial = CloudInit{shared};
        const CoupledRun run = simulate_coupled(indexed, limit, config);
        const double sup_mse = ensemble_sup_mse(run.first, run.second);
        const double terminal_w2 = w2_distance(run.first.terminal(), run.second.terminal());
        report.rows.push_back({n, sup_mse, terminal_w2});
    }

    std::vector<double> gaps;
    for (const auto& row : report.rows) gaps.push_back(row.sup_mse);
    const TrendOutcome outcome = check_trend(gaps, trend, "sup-t mean-square gap");
    report.monotone_pass = outcome.monotone;
    report.final_pass = outcome.final_ok;
    report.failure = outcome.message;
    return report;
}

PenalizationReport penalization_experiment(const SdeSystem& system,
                                           const std::vector<double>& eps_list,
                                           const SolverConfig& config,
                                           std::optional<double> h_ratio,
                                           const TrendSettings& trend) {
    if (eps_list.empty()) throw ConfigError("penalization requires an epsilon list");
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        if (!(eps_list[k] > 0.0)) throw ConfigError("penalization epsilons must be positive");
        if (k > 0 && !(eps_list[k] < eps_list[k - 1])) {
            throw ConfigError("penalization epsilons must be strictly decreasing");
        }
    }
    if (h_ratio.has_value() && !(*h_ratio > 0.0 && *h_ratio <= 0.5)) {
        throw ConfigError("penalization h_ratio must lie in (0, 1/2]");
    }
    if (!h_ratio.has_value() && config.step > eps_list.back() / 2.0 + 1e-15) {
        throw ConfigError("a fixed step must satisfy h <= min(eps)/2");
    }

    PenalizationReport report;
    for (const double eps : eps_list) {
        SolverConfig explicit_cfg = config;
        explicit_cfg.scheme = Scheme::YosidaExplicit;
        explicit_cfg.penalization = eps;
        if (h_ratio.has_value()) explicit_cfg.step = eps * *h_ratio;
        SolverConfig implicit_cfg = explicit_cfg;
        implicit_cfg.scheme = Scheme::ResolventImplicit;
        implicit_cfg.penalization = 0.0;

        const CoupledRun run = simulate_coupled(system, explicit_cfg, system, implicit_cfg);
        report.rows.push_back({eps, ensemble_sup_mse(run.first, run.second)});
    }

    std::vector<double> gaps;
    for (const auto& row : report.rows) gaps.push_back(row.sup_mse);
    const TrendOutcome outcome = check_trend(gaps, trend, "penalization gap");
    report.monotone_pass = outcome.monotone;
    report.final_pass = outcome.final_ok;
    report.failure = outcome.message;
    return report;
}

DeviationReport hypothesis_sequence_checks(const SequenceSystem& seq, double eps,
                                           const std::vector<Vec>& grid,
                                           const std::vector<int>& indices) {
    if (indices.empty()) throw ConfigError("hypothesis sequence checks require indices");
    if (grid.empty()) throw ConfigError("hypothesis sequence checks require a grid");

    // Fixed probe cloud; the built-in families deviate independently of mu.
    const int d = seq.operators.base.dimension();
    ParticleCloud probe(d, 4);
    for (int i = 0; i < 4; ++i) {
        probe.set_point(i, Vec::Constant(d, 0.25 * i));
    }
    const MeasureStats stats = MeasureStats::of(probe);

    DeviationReport report;
    Vec b_lim, b_idx;
    Mat s_lim, s_idx;
    for (const int n : indices) {
        DeviationRow row;
        row.n = n;
        row.operator_dev = yosida_uniform_deviation(seq.operators, eps, grid, n);
        const CoefficientSpec indexed = seq.coefficients.at_index(n);
        for (const Vec& x : grid) {
            eval_drift_into(seq.coefficients, x, stats, b_lim);
            eval_drift_into(indexed, x, stats, b_idx);
            row.drift_dev = std::max(row.drift_dev, (b_idx - b_lim).norm());
            eval_diffusion_into(seq.coefficients, x, stats, s_lim);
            eval_diffusion_into(indexed, x, stats, s_idx);
            row.diffusion_dev = std::max(row.diffusion_dev, (s_idx - s_lim).norm());
        }
        report.rows.push_back(row);
    }

    std::ostringstream failure;
    const auto check_column = [&](const char* label, auto getter) {
        std::vector<double> values;
        for (const auto& row : report.rows) values.push_back(getter(row));
        bool all_zero = true;
        for (const double v : values) all_zero = all_zero && v == 0.0;
        if (all_zero) return;
        for (std::size_t k = 1; k < values.size(); ++k) {
            if (values[k] > values[k - 1] + 1e-12) {
                report.pass = false;
                failure << label << " deviation increased along the index list; ";
                return;
            }
        }
        const double expected_drop =
            static_cast<double>(indices.front()) / static_cast<double>(indices.back());
        if (values.back() > values.front() * expected_drop * 1.1 + 1e-15) {
            report.pass = false;
            failure << label << " deviation does not shrink like 1/n along the list; ";
        }
    };
    check_column("operator", [](const DeviationRow& r) { return r.operator_dev; });
    check_column("drift", [](const DeviationRow& r) { return r.drift_dev; });
    check_column("diffusion", [](const DeviationRow& r) { return r.diffusion_dev; });
    report.failure = failure.str();
    return report;
}

InvariantConvergenceReport invariant_convergence_experiment(
    const SequenceSystem& seq, const SolverConfig& config,
    const AssumptionConstants& constants, const InvariantConvergenceSettings& settings) {
    if (seq.indices.empty()) throw ConfigError("invariant convergence requires an index list");
    require_dissipative(seq.coefficients, constants);
    for (const int n : seq.indices) {
        require_dissipative(seq.coefficients.at_index(n), constants);
    }

    InvariantConvergenceReport report;
    const SdeSystem limit = system_at(seq, std::nullopt);
    const InvariantEstimate limit_est =
        estimate_invariant_measure(limit, config, settings.burn_in, constants);
    report.limit_second_moment = limit_est.second_moment;

    // Monte-Carlo floor from two fresh-seed estimates of the same limit law.
    SolverConfig floor_a = config;
    floor_a.seed = floor_seed_a(config.seed);
    SolverConfig floor_b = config;
    floor_b.seed = floor_seed_b(config.seed);
    const InvariantEstimate est_a =
        estimate_invariant_measure(limit, floor_a, settings.burn_in, constants);
    const InvariantEstimate est_b =
        estimate_invariant_measure(limit, floor_b, settings.burn_in, constants);
    report.noise_floor = w2_distance(est_a.cloud, est_b.cloud);

    for (const int n : seq.indices) {
        const SdeSystem indexed = system_at(seq, n);
        const InvariantEstimate est =
            estimate_invariant_measure(indexed, config, settings.burn_in, constants);
        InvariantGapRow row;
        row.n = n;
        row.w2_gap = w2_distance(est.cloud, limit_est.cloud);
        row.w1_gap = w1_distance(est.cloud, limit_est.cloud);
        row.second_moment = est.second_moment;
        report.rows.push_back(row);
    }

    report.moment_bound =
        settings.moment_bound.value_or(4.0 * report.limit_second_moment + 1.0);
    std::ostringstream failure;
    for (const auto& row : report.rows) {
        if (row.second_moment > report.moment_bound) {
            report.moment_pass = false;
            failure << "second moment at n=" << row.n << " (" << row.second_moment
                    << ") exceeds the uniform bound " << report.moment_bound << "; ";
        }
    }

    const double exempt_level = settings.floor_multiple * report.noise_floor;
    for (std::size_t k = 1; k < report.rows.size(); ++k) {
        const double prev = report.rows[k - 1].w2_gap;
        const double cur = report.rows[k].w2_gap;
        if (prev <= exempt_level && cur <= exempt_level) continue;  // inside the floor
        if (cur > prev * (1.0 + settings.pair_slack) + 1e-18) {
            report.monotone_pass = false;
            failure << "W2 gap not decreasing between n=" << report.rows[k - 1].n << " and n="
                    << report.rows[k].n << " (" << prev << " -> " << cur << "); ";
        }
    }
    if (report.rows.back().w2_gap > exempt_level) {
        report.final_pass = false;
        failure << "final W2 gap " << report.rows.back().w2_gap << " exceeds "
                << settings.floor_multiple << " x floor (" << report.noise_floor << "); ";
    }
    report.failure = failure.str();
    return report;
}

}  // namespace mvsde
