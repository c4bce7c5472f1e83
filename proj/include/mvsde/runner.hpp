#pragma once

#include "mvsde/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mvsde {

/// Exit-code taxonomy shared by the CLI and the acceptance suite.
enum class RunStatus : int {
    Pass = 0,
    AssertionFailure = 1,
    ConfigFailure = 2,
    CertificationRefusal = 3,
    Instability = 4,
};

struct RunResult {
    RunStatus status = RunStatus::Pass;
    std::string message;
    std::vector<std::filesystem::path> outputs;
};

/// Runs one experiment subcommand ("simulate", "contraction", "ergodicity",
/// "converge-solutions", "converge-invariants", "penalization"), writing the
/// report CSVs and the manifest under config.output_dir. Report CSVs are
/// written even when assertions fail; certification refusals and validation
/// errors surface as the corresponding status before any output.
RunResult run_subcommand(const std::string& command, const ExperimentConfig& config);

}  // namespace mvsde
