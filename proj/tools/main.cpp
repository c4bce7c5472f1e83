#include "mvsde/config.hpp"
#include "mvsde/runner.hpp"
#include "mvsde/selftest.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

struct GlobalOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

int run_experiment(const std::string& command, const GlobalOptions& opts) {
    using mvsde::RunStatus;
    try {
        mvsde::ExperimentConfig cfg = mvsde::load_config(opts.config_path);
        if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
        if (opts.seed.has_value()) cfg.solver.seed = *opts.seed;
        cfg.solver.threads = opts.threads;

        const mvsde::RunResult result = mvsde::run_subcommand(command, cfg);
        for (const auto& path : result.outputs) {
            std::cout << "wrote " << path.string() << "\n";
        }
        if (result.status == RunStatus::Pass) {
            std::cout << command << ": PASS\n";
        } else {
            std::cout << command << ": FAIL " << result.message << "\n";
        }
        return static_cast<int>(result.status);
    } catch (const mvsde::CertificationError& e) {
        std::cerr << "certification refusal: " << e.what() << "\n";
        return static_cast<int>(RunStatus::CertificationRefusal);
    } catch (const mvsde::InstabilityError& e) {
        std::cerr << "instability: " << e.what() << "\n";
        return static_cast<int>(RunStatus::Instability);
    } catch (const mvsde::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return static_cast<int>(RunStatus::ConfigFailure);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(RunStatus::ConfigFailure);
    }
}

int run_selftest_command() {
    const std::vector<mvsde::PropertyResult> results = mvsde::run_selftest();
    bool all_pass = true;
    for (const auto& r : results) {
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name;
        if (!r.pass) std::cout << " -- " << r.detail;
        std::cout << "\n";
    }
    for (const auto& r : results) all_pass = all_pass && r.pass;
    std::cout << (all_pass ? "selftest: PASS" : "selftest: FAIL") << " (" << results.size()
              << " properties)\n";
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and verification toolkit for multivalued mean-field SDEs"};
    app.require_subcommand(1);

    GlobalOptions opts;
    app.add_option("--config", opts.config_path, "Path to the experiment config JSON")
        ->envname("");
    app.add_option("--out", opts.out_dir, "Output directory (overrides the config)");
    app.add_option("--seed", opts.seed, "Seed override");
    app.add_option("--threads", opts.threads, "Worker threads (never changes results)")
        ->check(CLI::PositiveNumber);

    static constexpr const char* kExperiments[] = {
        "simulate",          "contraction",         "ergodicity",
        "converge-solutions", "converge-invariants", "penalization"};
    for (const char* name : kExperiments) {
        app.add_subcommand(name)->fallthrough();
    }
    app.add_subcommand("selftest", "Run the property suite at reduced budgets")->fallthrough();

    CLI11_PARSE(app, argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    if (command == "selftest") {
        return run_selftest_command();
    }
    if (opts.config_path.empty()) {
        std::cerr << "config error: --config is required for " << command << "\n";
        return static_cast<int>(mvsde::RunStatus::ConfigFailure);
    }
    return run_experiment(command, opts);
}
