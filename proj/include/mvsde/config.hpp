#pragma once

#include "mvsde/coefficients.hpp"
#include "mvsde/operators.hpp"
#include "mvsde/solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace mvsde {

using Json = nlohmann::json;

/// Parsed experiment configuration; cross-field constraints are validated
/// before any run and failures name the offending JSON path.
struct ExperimentConfig {
    OperatorSpec op = OperatorSpec::zero(1);
    std::optional<OperatorSequenceSpec> sequence;
    CoefficientSpec coefficients;
    AssumptionConstants constants;
    SolverConfig solver;
    InitialLaw initial = PointMassInit{Vec::Zero(1)};
    std::string output_dir = "out";
    Json experiment = Json::object();
    Json raw = Json::object();

    SdeSystem system() const { return SdeSystem{op, 0.0, coefficients, initial}; }
};

ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Parses an initial-law object ({"kind":"point"|"uniform_box"|"cloud", ...});
/// used both for the top-level initial law and experiment-block clouds.
InitialLaw parse_initial_law(const Json& j, const std::string& path);

}  // namespace mvsde
