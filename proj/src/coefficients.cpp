#include "mvsde/coefficients.hpp"

#include "mvsde/rng.hpp"
#include "mvsde/wasserstein.hpp"

#include <cmath>
#include <iterator>
#include <limits>
#include <sstream>

namespace mvsde {

namespace {

double drift_theta(const DriftSpec& d) {
    return std::visit([](const auto& s) { return s.theta; }, d);
}

double drift_weight(const DriftSpec& d) {
    return std::visit([](const auto& s) { return s.mean_weight; }, d);
}

}  // namespace

int CoefficientSpec::state_dim() const {
    if (const auto* c = std::get_if<ConstantDiffusion>(&diffusion)) {
        return static_cast<int>(c->value.rows());
    }
    return 1;  // the scalar diffusion variants fix d = m = 1
}

int CoefficientSpec::noise_dim() const {
    if (const auto* c = std::get_if<ConstantDiffusion>(&diffusion)) {
        return static_cast<int>(c->value.cols());
    }
    return 1;
}

CoefficientSpec CoefficientSpec::at_index(int n) const {
    if (n < 1) throw ConfigError("coefficient perturbation index must be positive");
    CoefficientSpec out = *this;
    out.index = n;
    return out;
}

bool CoefficientSpec::measure_dependent() const {
    if (drift_weight(drift) != 0.0) return true;
    if (const auto* m = std::get_if<MeanLinearDiffusion>(&diffusion)) {
        return m->mean_slope != 0.0;
    }
    return false;
}

void CoefficientSpec::validate() const {
    if (drift_theta(drift) < 0.0) throw ConfigError("drift theta must be nonnegative");
    if (const auto* c = std::get_if<ConstantDiffusion>(&diffusion)) {
        if (c->value.rows() < 1 || c->value.cols() < 1) {
            throw ConfigError("constant diffusion matrix must be nonempty");
        }
    }
    if (perturbation.drift_scale < 0.0 || perturbation.diffusion_scale < 0.0) {
        throw ConfigError("perturbation scales must be nonnegative");
    }
    if (index.has_value() && *index < 1) {
        throw ConfigError("coefficient perturbation index must be positive");
    }
}

MeasureStats MeasureStats::of(const ParticleCloud& cloud) {
    return {cloud.mean(), cloud.bounded_mean()};
}

void eval_drift_into(const CoefficientSpec& spec, const Vec& x, const MeasureStats& stats,
                     Vec& out) {
    std::visit([&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, MeanFieldLinearDrift>) {
            out = -d.theta * x + d.mean_weight * stats.mean;
        } else {
            out = -d.theta * x + d.mean_weight * stats.bounded_mean;
        }
    }, spec.drift);
    if (spec.index.has_value() && spec.perturbation.drift_scale != 0.0) {
        const double scale = spec.perturbation.drift_scale / static_cast<double>(*spec.index);
        for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += scale * std::sin(x[i]);
    }
}

Vec eval_drift(const CoefficientSpec& spec, const Vec& x, const ParticleCloud& mu) {
    if (x.size() != mu.dim()) throw ConfigError("eval_drift: dimension mismatch");
    Vec out;
    eval_drift_into(spec, x, MeasureStats::of(mu), out);
    return out;
}

void eval_diffusion_into(const CoefficientSpec& spec, const Vec& x, const MeasureStats& stats,
                         Mat& out) {
    std::visit([&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantDiffusion>) {
            out = s.value;
        } else if constexpr (std::is_same_v<T, StateLinearDiffusion>) {
            out.resize(1, 1);
            out(0, 0) = s.base + s.state_slope * x[0];
        } else {
            out.resize(1, 1);
            out(0, 0) = s.base + s.mean_slope * stats.mean[0];
        }
    }, spec.diffusion);
    if (spec.index.has_value() && spec.perturbation.diffusion_scale != 0.0) {
        const double bump = spec.perturbation.diffusion_scale / static_cast<double>(*spec.index);
        const Eigen::Index k = std::min(out.rows(), out.cols());
        for (Eigen::Index i = 0; i < k; ++i) out(i, i) += bump;
    }
}

Mat eval_diffusion(const CoefficientSpec& spec, const Vec& x, const ParticleCloud& mu) {
    if (x.size() != mu.dim()) throw ConfigError("eval_diffusion: dimension mismatch");
    Mat out;
    eval_diffusion_into(spec, x, MeasureStats::of(mu), out);
    return out;
}

double lambda_of(const AssumptionConstants& constants) { return constants.lambda(); }

bool CertificationReport::passed() const {
    for (const auto& c : checks) {
        if (c.violated) return false;
    }
    return true;
}

std::string CertificationReport::summary() const {
    std::ostringstream oss;
    for (const auto& c : checks) {
        oss << (c.violated ? "[violated] " : "[ok] ") << c.name << " worst slack " << c.worst_slack;
        if (c.violated) oss << " witness: " << c.witness;
        oss << "\n";
    }
    return oss.str();
}

namespace {

struct SamplePair {
    Vec x1, x2;
    ParticleCloud mu1, mu2;
    double w2;
};

std::string describe_witness(const SamplePair& s, double value, double bound) {
    std::ostringstream oss;
    oss << "x1=" << s.x1.transpose() << " x2=" << s.x2.transpose()
        << " W2(mu1,mu2)=" << s.w2 << " value=" << value << " bound=" << bound;
    return oss.str();
}

void record(HypothesisCheck& check, const SamplePair& s, double value, double bound,
            double scale) {
    const double slack = bound - value;
    if (slack < check.worst_slack) {
        check.worst_slack = slack;
    }
    if (slack < -1e-10 * std::max(1.0, scale) && !check.violated) {
        check.violated = true;
        check.witness = describe_witness(s, value, bound);
    }
}

}  // namespace

CertificationReport certify_hypotheses(const CoefficientSpec& spec,
                                       const AssumptionConstants& constants, int sample_budget,
                                       std::uint64_t seed) {
    spec.validate();
    if (sample_budget < 1000) {
        throw ConfigError("certification requires a sample budget of at least 1000");
    }
    const int d = spec.state_dim();
    const int cloud_size = 8;
    static constexpr double kRadii[] = {0.5, 1.0, 2.0, 5.0, 10.0, 20.0};

    CertificationReport report;
    report.checks = {
        {"growth (L_bsigma)", std::numeric_limits<double>::infinity(), false, ""},
        {"drift one-sided (L1)", std::numeric_limits<double>::infinity(), false, ""},
        {"diffusion square (L2)", std::numeric_limits<double>::infinity(), false, ""},
    };
    HypothesisCheck dissipative_check{"dissipativity (L3/L4)",
                                      std::numeric_limits<double>::infinity(), false, ""};

    if (constants.dissipative && !(constants.lambda() > 2.0 * constants.l2)) {
        dissipative_check.violated = true;
        dissipative_check.worst_slack = constants.lambda() - 2.0 * constants.l2;
        dissipative_check.witness = "declared lambda = L4 - L3 does not exceed 2*L2";
    }

    rng::SequenceSampler sampler(seed, rng::Stream::Certify);
    Vec b1, b2;
    Mat s1, s2;

    for (int k = 0; k < sample_budget; ++k) {
        const double radius = kRadii[k % std::size(kRadii)];
        SamplePair s{Vec(d), Vec(d), ParticleCloud(d, cloud_size), ParticleCloud(d, cloud_size),
                     0.0};
        for (int i = 0; i < d; ++i) s.x1[i] = sampler.uniform(-radius, radius);

        Vec cloud_point(d);
        for (int j = 0; j < cloud_size; ++j) {
            for (int i = 0; i < d; ++i) cloud_point[i] = sampler.uniform(-radius, radius);
            s.mu1.set_point(j, cloud_point);
        }

        // Alternate free pairs with aligned-shift pairs; the latter realize
        // W2 = |shift| exactly and expose dissipativity violations.
        if (k % 4 == 3) {
            Vec direction(d);
            for (int i = 0; i < d; ++i) direction[i] = sampler.normal();
            if (direction.norm() == 0.0) direction[0] = 1.0;
            direction.normalize();
            const double t = sampler.uniform(-radius, radius);
            s.x2 = s.x1 + t * direction;
            const Vec shift = t * direction;
            for (int j = 0; j < cloud_size; ++j) {
                s.mu2.set_point(j, Vec(s.mu1.point(j) + shift));
            }
        } else {
            for (int i = 0; i < d; ++i) s.x2[i] = sampler.uniform(-radius, radius);
            for (int j = 0; j < cloud_size; ++j) {
                for (int i = 0; i < d; ++i) cloud_point[i] = sampler.uniform(-radius, radius);
                s.mu2.set_point(j, cloud_point);
            }
        }
        s.w2 = w2_exact_assignment(s.mu1, s.mu2).value;

        const MeasureStats st1 = MeasureStats::of(s.mu1);
        const MeasureStats st2 = MeasureStats::of(s.mu2);
        eval_drift_into(spec, s.x1, st1, b1);
        eval_drift_into(spec, s.x2, st2, b2);
        eval_diffusion_into(spec, s.x1, st1, s1);
        eval_diffusion_into(spec, s.x2, st2, s2);

        const double mu1_norm = std::sqrt(s.mu1.second_moment());
        const double growth_value = b1.norm() + s1.norm();
        const double growth_bound = constants.growth * (1.0 + s.x1.norm() + mu1_norm);
        record(report.checks[0], s, growth_value, growth_bound, growth_bound);

        const Vec dx = s.x1 - s.x2;
        const double gap_sq = dx.squaredNorm() + s.w2 * s.w2;
        const double drift_pair = 2.0 * dx.dot(b1 - b2);
        record(report.checks[1], s, drift_pair, constants.l1 * gap_sq, gap_sq);

        const double diff_sq = (s1 - s2).squaredNorm();
        record(report.checks[2], s, diff_sq, constants.l2 * gap_sq, gap_sq);

        if (constants.dissipative) {
            const double lhs = drift_pair + diff_sq;
            const double rhs =
                constants.l3 * s.w2 * s.w2 - constants.l4 * dx.squaredNorm();
            record(dissipative_check, s, lhs, rhs, gap_sq);
        }
    }

    if (constants.dissipative) report.checks.push_back(dissipative_check);
    return report;
}

}  // namespace mvsde
