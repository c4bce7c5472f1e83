#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mvsde {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr const char* kToolVersion = "0.1.0";

/// Invalid parameters, malformed configuration, or inconsistent dimensions.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A declared hypothesis failed its sampled certification; experiments that
/// require the hypothesis refuse to run.
class CertificationError : public std::runtime_error {
public:
    explicit CertificationError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite state detected while stepping; carries the offending step index.
class InstabilityError : public std::runtime_error {
public:
    InstabilityError(const std::string& what, std::int64_t step)
        : std::runtime_error(what), step_(step) {}
    std::int64_t step() const { return step_; }

private:
    std::int64_t step_;
};

}  // namespace mvsde
