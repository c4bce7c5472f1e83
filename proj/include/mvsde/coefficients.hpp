#pragma once

#include "mvsde/cloud.hpp"
#include "mvsde/types.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mvsde {

/// b(x, mu) = -theta * x + mean_weight * mean(mu).
struct MeanFieldLinearDrift {
    double theta = 1.0;        // reversion rate, >= 0
    double mean_weight = 0.0;  // coupling to the empirical mean
};

/// b(x, mu) = -theta * x + mean_weight * (1/N) sum tanh(y_j) componentwise;
/// the kernel-integral drift with a bounded Lipschitz interaction.
struct BoundedKernelDrift {
    double theta = 1.0;
    double mean_weight = 0.0;
};

using DriftSpec = std::variant<MeanFieldLinearDrift, BoundedKernelDrift>;

/// sigma(x, mu) = fixed d x m matrix.
struct ConstantDiffusion {
    Mat value;
};

/// sigma(x, mu) = base + state_slope * x, scalar (d = m = 1).
struct StateLinearDiffusion {
    double base = 1.0;
    double state_slope = 0.0;
};

/// sigma(x, mu) = base + mean_slope * mean(mu), scalar (d = m = 1).
struct MeanLinearDiffusion {
    double base = 1.0;
    double mean_slope = 0.0;
};

using DiffusionSpec = std::variant<ConstantDiffusion, StateLinearDiffusion, MeanLinearDiffusion>;

/// Built-in 1/n perturbation family:
///   b^n = b + (drift_scale/n) * sin(x) componentwise,
///   sigma^n = sigma + (diffusion_scale/n) on the leading diagonal.
struct PerturbationRule {
    double drift_scale = 0.0;      // c_b
    double diffusion_scale = 0.0;  // c_sigma
};

struct CoefficientSpec {
    DriftSpec drift;
    DiffusionSpec diffusion;
    PerturbationRule perturbation;
    std::optional<int> index;  // perturbation index n; nullopt = limit coefficients

    int state_dim() const;
    int noise_dim() const;
    CoefficientSpec at_index(int n) const;
    bool measure_dependent() const;
    void validate() const;
};

/// Per-step frozen summary of the empirical measure consumed by the
/// coefficient evaluations.
struct MeasureStats {
    Vec mean;
    Vec bounded_mean;  // mean of tanh
    static MeasureStats of(const ParticleCloud& cloud);
};

void eval_drift_into(const CoefficientSpec& spec, const Vec& x, const MeasureStats& stats,
                     Vec& out);
Vec eval_drift(const CoefficientSpec& spec, const Vec& x, const ParticleCloud& mu);

void eval_diffusion_into(const CoefficientSpec& spec, const Vec& x, const MeasureStats& stats,
                         Mat& out);
Mat eval_diffusion(const CoefficientSpec& spec, const Vec& x, const ParticleCloud& mu);

/// Declared hypothesis constants; machine-certified by sampling, never
/// inferred. lambda = state_decay minus measure gain.
struct AssumptionConstants {
    double growth = 1.0;  // L_bsigma
    double l1 = 0.0;
    double l2 = 0.0;
    double l3 = 0.0;
    double l4 = 0.0;
    bool dissipative = false;  // whether the L3/L4 inequality is declared

    double lambda() const { return l4 - l3; }
};

double lambda_of(const AssumptionConstants& constants);

struct HypothesisCheck {
    std::string name;
    double worst_slack = 0.0;  // min over samples of (bound - value); negative = violated
    bool violated = false;
    std::string witness;
};

struct CertificationReport {
    std::vector<HypothesisCheck> checks;
    bool passed() const;
    std::string summary() const;
};

inline constexpr std::uint64_t kCertifySeed = 0x6365727469667939ULL;

/// Samples (x1, x2) from a widening grid and (mu1, mu2) as random small
/// clouds, then checks each declared inequality. Necessary-condition testing,
/// not proof; the report carries the worst slack and any violation witness.
CertificationReport certify_hypotheses(const CoefficientSpec& spec,
                                       const AssumptionConstants& constants, int sample_budget,
                                       std::uint64_t seed = kCertifySeed);

}  // namespace mvsde
