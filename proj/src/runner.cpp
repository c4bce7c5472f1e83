#include "mvsde/runner.hpp"

#include "mvsde/report_io.hpp"
#include "mvsde/rng.hpp"

#include <chrono>
#include <sstream>

namespace mvsde {

namespace {

using Clock = std::chrono::steady_clock;

double expect_number(const Json& j, const std::string& path, const std::string& key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number()) {
        throw ConfigError(path + "/" + key + ": expected a number");
    }
    return it->get<double>();
}

double number_or(const Json& j, const std::string& path, const std::string& key, double fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number()) throw ConfigError(path + "/" + key + ": expected a number");
    return it->get<double>();
}

std::optional<double> optional_number(const Json& j, const std::string& path,
                                      const std::string& key) {
    const auto it = j.find(key);
    if (it == j.end()) return std::nullopt;
    if (!it->is_number()) throw ConfigError(path + "/" + key + ": expected a number");
    return it->get<double>();
}

std::vector<int> expect_indices(const Json& j, const std::string& path, const std::string& key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_array() || it->empty()) {
        throw ConfigError(path + "/" + key + ": expected a nonempty integer array");
    }
    std::vector<int> out;
    for (const auto& v : *it) {
        if (!v.is_number_integer()) {
            throw ConfigError(path + "/" + key + ": expected integers");
        }
        out.push_back(v.get<int>());
    }
    return out;
}

std::vector<double> expect_numbers(const Json& j, const std::string& path,
                                   const std::string& key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_array() || it->empty()) {
        throw ConfigError(path + "/" + key + ": expected a nonempty number array");
    }
    std::vector<double> out;
    for (const auto& v : *it) {
        if (!v.is_number()) throw ConfigError(path + "/" + key + ": expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

ReferenceLaw parse_reference(const Json& j, const std::string& path) {
    const auto it = j.find("law");
    if (it == j.end() || !it->is_string()) {
        throw ConfigError(path + "/law: expected \"half_normal\" or \"normal\"");
    }
    const std::string law = it->get<std::string>();
    if (law == "half_normal") return HalfNormalLaw{expect_number(j, path, "scale")};
    if (law == "normal") {
        return NormalLaw{expect_number(j, path, "mean"), expect_number(j, path, "stddev")};
    }
    throw ConfigError(path + "/law: unknown reference law '" + law + "'");
}

ParticleCloud experiment_cloud(const Json& block, const std::string& path, const std::string& key,
                               int particles, std::uint64_t seed) {
    const auto it = block.find(key);
    if (it == block.end()) {
        throw ConfigError(path + "/" + key + ": missing initial-law object");
    }
    return materialize_initial_cloud(parse_initial_law(*it, path + "/" + key), particles, seed);
}

class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void add(const std::string& name, std::string content) {
        manifest_.add_output(name, content);
        files_.emplace_back(name, std::move(content));
    }

    std::vector<std::filesystem::path> flush(const Json& config, std::uint64_t seed,
                                             double wall_clock) {
        std::vector<std::filesystem::path> written;
        for (const auto& [name, content] : files_) {
            const auto path = dir_ / name;
            write_file_atomic(path, content);
            written.push_back(path);
        }
        const auto manifest_path = dir_ / "manifest.json";
        write_file_atomic(manifest_path, manifest_.build(config, seed, wall_clock).dump(2) + "\n");
        written.push_back(manifest_path);
        return written;
    }

private:
    std::filesystem::path dir_;
    ManifestBuilder manifest_;
    std::vector<std::pair<std::string, std::string>> files_;
};

SequenceSystem require_sequence(const ExperimentConfig& cfg, const std::vector<int>& indices) {
    if (!cfg.sequence.has_value()) {
        throw ConfigError("/operator_sequence: required by convergence experiments");
    }
    return SequenceSystem{*cfg.sequence, cfg.coefficients, cfg.initial, indices};
}

RunResult finish(OutputSet& outputs, const ExperimentConfig& cfg, Clock::time_point start,
                 bool pass, const std::string& failure) {
    RunResult result;
    const double wall =
        std::chrono::duration_cast<std::chrono::duration<double>>(Clock::now() - start).count();
    result.outputs = outputs.flush(cfg.raw, cfg.solver.seed, wall);
    result.status = pass ? RunStatus::Pass : RunStatus::AssertionFailure;
    result.message = failure;
    return result;
}

RunResult run_simulate(const ExperimentConfig& cfg) {
    const auto start = Clock::now();
    const TrajectoryEnsemble ensemble = simulate(cfg.system(), cfg.solver);
    OutputSet outputs(cfg.output_dir);
    outputs.add("snapshots.csv", snapshot_csv(ensemble));
    outputs.add("reflection_variation.csv", reflection_variation_csv(ensemble));
    return finish(outputs, cfg, start, true, "");
}

RunResult run_contraction(const ExperimentConfig& cfg) {
    const auto start = Clock::now();
    const Json& block = cfg.experiment;
    const std::string path = "/experiment";

    ContractionSettings settings;
    const auto window = expect_numbers(block, path, "fit_window");
    if (window.size() != 2 || !(window[0] < window[1])) {
        throw ConfigError(path + "/fit_window: expected [lo, hi] with lo < hi");
    }
    settings.fit_lo = window[0];
    settings.fit_hi = window[1];
    settings.bound_tol = number_or(block, path, "bound_tol", 0.5);
    settings.max_fitted_slope = optional_number(block, path, "max_fitted_slope");

    const ParticleCloud mu0 =
        experiment_cloud(block, path, "mu0", cfg.solver.particles, cfg.solver.seed);
    const ParticleCloud nu0 = experiment_cloud(block, path, "nu0", cfg.solver.particles,
                                               rng::mix64(cfg.solver.seed ^ 0x6e7530ULL));

    const ContractionReport report =
        contraction_experiment(cfg.system(), mu0, nu0, cfg.solver, cfg.constants, settings);

    OutputSet outputs(cfg.output_dir);
    outputs.add("contraction.csv", contraction_csv(report));
    return finish(outputs, cfg, start, report.passed(), report.failure);
}

RunResult run_ergodicity(const ExperimentConfig& cfg) {
    const auto start = Clock::now();
    const Json& block = cfg.experiment;
    const std::string path = "/experiment";

    ErgodicitySettings settings;
    settings.burn_in = expect_number(block, path, "burn_in");
    settings.transient_horizon = number_or(block, path, "transient_horizon", 0.0);
    settings.bound_tol = number_or(block, path, "bound_tol", 0.5);

    OutputSet outputs(cfg.output_dir);
    bool pass = true;
    std::ostringstream failure;
    InvariantEstimate estimate;

    if (settings.transient_horizon > 0.0) {
        const ParticleCloud nu0 =
            experiment_cloud(block, path, "nu0", cfg.solver.particles,
                             rng::mix64(cfg.solver.seed ^ 0x6e7530ULL));
        ErgodicityReport report =
            ergodicity_bound_experiment(cfg.system(), nu0, cfg.solver, cfg.constants, settings);
        outputs.add("ergodicity.csv", ergodicity_csv(report));
        estimate = std::move(report.invariant);
        if (!report.pass) {
            pass = false;
            failure << report.failure;
        }
    } else {
        estimate = estimate_invariant_measure(cfg.system(), cfg.solver, settings.burn_in,
                                              cfg.constants);
    }

    outputs.add("invariant_cloud.csv", cloud_csv(estimate.cloud));
    outputs.add("invariant.json", invariant_sidecar_json(estimate, cfg.solver.particles));

    if (const auto it = block.find("reference"); it != block.end()) {
        const ReferenceLaw law = parse_reference(*it, path + "/reference");
        const double tol = expect_number(*it, path + "/reference", "w2_tol");
        const double gap = reference_gap_w2(estimate, law);
        if (gap > tol) {
            pass = false;
            failure << "W2 gap to the reference law " << gap << " exceeds " << tol << "; ";
        }
    }
    return finish(outputs, cfg, start, pass, failure.str());
}

RunResult run_converge_solutions(const ExperimentConfig& cfg) {
    const auto start = Clock::now();
    const Json& block = cfg.experiment;
    const std::string path = "/experiment";

    const SequenceSystem seq = require_sequence(cfg, expect_indices(block, path, "indices"));
    TrendSettings trend;
    trend.pair_slack = number_or(block, path, "pair_slack", 0.1);
    trend.final_ratio_max = optional_number(block, path, "final_gap_ratio_max");
    trend.final_abs_max = optional_number(block, path, "max_final_gap");

    const ConvergenceReport report =
        solution_convergence_experiment(seq, cfg.solver, cfg.constants, trend);
    OutputSet outputs(cfg.output_dir);
    outputs.add("solution_convergence.csv", solution_convergence_csv(report));
    return finish(outputs, cfg, start, report.passed(), report.failure);
}

RunResult run_penalization(const ExperimentConfig& cfg) {
    const auto start = Clock::now();
    const Json& block = cfg.experiment;
    const std::string path = "/experiment";

    TrendSettings trend;
    trend.pair_slack = number_or(block, path, "pair_slack", 0.1);
    trend.final_ratio_max = optional_number(block, path, "final_gap_ratio_max");
    trend.final_abs_max = optional_number(block, path, "max_final_gap");

    const PenalizationReport report =
        penalization_experiment(cfg.system(), expect_numbers(block, path, "epsilons"), cfg.solver,
                                optional_number(block, path, "h_ratio"), trend);
    OutputSet outputs(cfg.output_dir);
    outputs.add("penalization.csv", penalization_csv(report));
    return finish(outputs, cfg, start, report.passed(), report.failure);
}

RunResult run_converge_invariants(const ExperimentConfig& cfg) {
    const auto start = Clock::now();
    const Json& block = cfg.experiment;
    const std::string path = "/experiment";

    const SequenceSystem seq = require_sequence(cfg, expect_indices(block, path, "indices"));
    InvariantConvergenceSettings settings;
    settings.burn_in = expect_number(block, path, "burn_in");
    settings.pair_slack = number_or(block, path, "pair_slack", 0.1);
    settings.floor_multiple = number_or(block, path, "floor_multiple", 2.0);
    settings.moment_bound = optional_number(block, path, "moment_bound");

    const InvariantConvergenceReport report =
        invariant_convergence_experiment(seq, cfg.solver, cfg.constants, settings);
    OutputSet outputs(cfg.output_dir);
    outputs.add("invariant_convergence.csv", invariant_convergence_csv(report));
    return finish(outputs, cfg, start, report.passed(), report.failure);
}

}  // namespace

RunResult run_subcommand(const std::string& command, const ExperimentConfig& config) {
    if (command == "simulate") return run_simulate(config);
    if (command == "contraction") return run_contraction(config);
    if (command == "ergodicity") return run_ergodicity(config);
    if (command == "converge-solutions") return run_converge_solutions(config);
    if (command == "converge-invariants") return run_converge_invariants(config);
    if (command == "penalization") return run_penalization(config);
    throw ConfigError("unknown subcommand: " + command);
}

}  // namespace mvsde
