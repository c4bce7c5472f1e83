#pragma once

#include "mvsde/convergence.hpp"
#include "mvsde/ergodicity.hpp"
#include "mvsde/solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mvsde {

/// Shortest round-trip decimal form of a double (std::to_chars).
std::string format_double(double v);

/// Fixed 9-decimal form used for time columns.
std::string format_time(double t);

/// Writes via a temporary file in the same directory plus rename, so an
/// interrupted run leaves nothing at the final path.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

// CSV renderings. Snapshot and report files carry headers; raw cloud dumps
// do not.
std::string snapshot_csv(const TrajectoryEnsemble& ensemble);          // t,particle,x1..xd
std::string reflection_variation_csv(const TrajectoryEnsemble& ensemble);  // particle,K_variation
std::string cloud_csv(const ParticleCloud& cloud);                     // raw rows x1..xd
std::string contraction_csv(const ContractionReport& report);          // t,w2,log_w2_sq,bound
std::string ergodicity_csv(const ErgodicityReport& report);            // t,w2_sq,bound
std::string solution_convergence_csv(const ConvergenceReport& report); // n,sup_mse,terminal_w2
std::string penalization_csv(const PenalizationReport& report);        // epsilon,sup_mse
std::string invariant_convergence_csv(const InvariantConvergenceReport& report);
std::string invariant_sidecar_json(const InvariantEstimate& estimate, int particles);

/// Collects output checksums and renders the run manifest.
class ManifestBuilder {
public:
    void add_output(const std::string& name, std::string_view content);
    nlohmann::json build(const nlohmann::json& config, std::uint64_t seed,
                         double wall_clock_seconds) const;

private:
    std::vector<std::pair<std::string, std::string>> outputs_;
};

}  // namespace mvsde
