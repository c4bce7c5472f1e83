#include "mvsde/report_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace mvsde {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_time(double t) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9f", t);
    return buf;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    const std::filesystem::path dir = path.parent_path();
    if (!dir.empty()) {
        std::filesystem::create_directories(dir);
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw ConfigError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw ConfigError("atomic rename failed for " + path.string() + ": " + ec.message());
    }
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const char ch : bytes) {
        hash ^= static_cast<unsigned char>(ch);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string fnv1a64_hex(std::string_view bytes) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string snapshot_csv(const TrajectoryEnsemble& ensemble) {
    std::ostringstream out;
    const int d = ensemble.snapshots.front().dim();
    out << "t,particle";
    for (int j = 1; j <= d; ++j) out << ",x" << j;
    out << "\n";
    for (std::size_t k = 0; k < ensemble.times.size(); ++k) {
        const std::string t = format_time(ensemble.times[k]);
        const ParticleCloud& cloud = ensemble.snapshots[k];
        for (int i = 0; i < cloud.size(); ++i) {
            out << t << ',' << i;
            const auto p = cloud.point(i);
            for (int j = 0; j < d; ++j) out << ',' << format_double(p[j]);
            out << "\n";
        }
    }
    return out.str();
}

std::string reflection_variation_csv(const TrajectoryEnsemble& ensemble) {
    std::ostringstream out;
    out << "particle,K_variation\n";
    for (std::size_t i = 0; i < ensemble.reflection_variation.size(); ++i) {
        out << i << ',' << format_double(ensemble.reflection_variation[i]) << "\n";
    }
    return out.str();
}

std::string cloud_csv(const ParticleCloud& cloud) {
    std::ostringstream out;
    for (int i = 0; i < cloud.size(); ++i) {
        const auto p = cloud.point(i);
        for (int j = 0; j < cloud.dim(); ++j) {
            if (j > 0) out << ',';
            out << format_double(p[j]);
        }
        out << "\n";
    }
    return out.str();
}

std::string contraction_csv(const ContractionReport& report) {
    std::ostringstream out;
    out << "t,w2,log_w2_sq,bound\n";
    for (std::size_t k = 0; k < report.times.size(); ++k) {
        const double w2 = report.w2_values[k];
        const double log_w2_sq = w2 > 0.0 ? 2.0 * std::log(w2)
                                          : -std::numeric_limits<double>::infinity();
        out << format_time(report.times[k]) << ',' << format_double(w2) << ','
            << format_double(log_w2_sq) << ',' << format_double(report.bounds[k]) << "\n";
    }
    return out.str();
}

std::string ergodicity_csv(const ErgodicityReport& report) {
    std::ostringstream out;
    out << "t,w2_sq,bound\n";
    for (const auto& row : report.rows) {
        out << format_time(row.t) << ',' << format_double(row.w2_sq) << ','
            << format_double(row.bound) << "\n";
    }
    return out.str();
}

std::string solution_convergence_csv(const ConvergenceReport& report) {
    std::ostringstream out;
    out << "n,sup_mse,terminal_w2\n";
    for (const auto& row : report.rows) {
        out << row.n << ',' << format_double(row.sup_mse) << ','
            << format_double(row.terminal_w2) << "\n";
    }
    return out.str();
}

std::string penalization_csv(const PenalizationReport& report) {
    std::ostringstream out;
    out << "epsilon,sup_mse\n";
    for (const auto& row : report.rows) {
        out << format_double(row.eps) << ',' << format_double(row.sup_mse) << "\n";
    }
    return out.str();
}

std::string invariant_convergence_csv(const InvariantConvergenceReport& report) {
    std::ostringstream out;
    out << "n,w2_gap,w1_gap,second_moment\n";
    for (const auto& row : report.rows) {
        out << row.n << ',' << format_double(row.w2_gap) << ',' << format_double(row.w1_gap)
            << ',' << format_double(row.second_moment) << "\n";
    }
    return out.str();
}

std::string invariant_sidecar_json(const InvariantEstimate& estimate, int particles) {
    nlohmann::json j;
    j["second_moment"] = estimate.second_moment;
    j["burn_in"] = estimate.burn_in;
    j["N"] = particles;
    j["seed"] = estimate.seed;
    return j.dump(2) + "\n";
}

void ManifestBuilder::add_output(const std::string& name, std::string_view content) {
    outputs_.emplace_back(name, fnv1a64_hex(content));
}

nlohmann::json ManifestBuilder::build(const nlohmann::json& config, std::uint64_t seed,
                                      double wall_clock_seconds) const {
    nlohmann::json j;
    j["config"] = config;
    j["config_hash"] = fnv1a64_hex(config.dump());
    j["seed"] = seed;
    j["tool_version"] = kToolVersion;
    j["wall_clock_seconds"] = wall_clock_seconds;
    nlohmann::json outs = nlohmann::json::object();
    for (const auto& [name, checksum] : outputs_) outs[name] = checksum;
    j["outputs"] = outs;
    return j;
}

}  // namespace mvsde
